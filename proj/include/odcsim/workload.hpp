#ifndef ODCSIM_WORKLOAD_HPP
#define ODCSIM_WORKLOAD_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "odcsim/types.hpp"

namespace odcsim {

// One training sample, reduced to its sequence length.
struct Sample {
    std::int64_t id = 0;
    Tokens length = 0;  // >= 1
};

// An ordered multiset of sequence lengths driving partitioning and simulation.
class Workload {
public:
    explicit Workload(std::vector<Sample> samples);

    const std::vector<Sample>& samples() const { return samples_; }
    Tokens max_length() const { return max_length_; }
    std::size_t size() const { return samples_.size(); }

    std::vector<Tokens> lengths() const;

private:
    std::vector<Sample> samples_;
    Tokens max_length_ = 0;
};

// Synthetic length distributions standing in for real dataset histograms.
struct LognormalDist {
    double mu = 8.0;
    double sigma = 1.5;
};
struct ParetoDist {
    double scale = 1.0;
    double shape = 1.0;
};
struct UniformDist {
    Tokens lo = 1;
    Tokens hi = 1;
};
using DistSpec = std::variant<LognormalDist, ParetoDist, UniformDist>;

// Parses "lognormal:mu=8,sigma=1.5", "pareto:scale=100,shape=1.2",
// "uniform:lo=5,hi=9".
DistSpec parse_dist_spec(const std::string& text);
std::string format_dist_spec(const DistSpec& dist);

// Draws n lengths from dist, clamped to [1, cap]. Same seed, same workload,
// bit for bit. The draws use an explicit mt19937_64-to-uniform mapping so the
// output does not depend on the standard library's distribution internals.
Workload generate_synthetic(const DistSpec& dist, std::int64_t n, Tokens cap, std::uint64_t seed);

// Reads newline-separated positive integers. Blank lines are skipped; any
// other unparseable line is a FormatError naming the line number.
Workload load_lengths(std::istream& in);
Workload load_lengths_file(const std::string& path);

// Rescales every length to max(1, round-half-up(length * ratio)), ids kept.
Workload scale_lengths(const Workload& w, double ratio);

struct WorkloadStats {
    std::int64_t count = 0;
    Tokens min = 0;
    Tokens max = 0;
    double mean = 0.0;
    Tokens p50 = 0;
    Tokens p90 = 0;
    Tokens p99 = 0;
    std::int64_t total = 0;
};

// Order statistics with nearest-rank quantiles.
WorkloadStats summarize(const Workload& w);

}  // namespace odcsim

#endif  // ODCSIM_WORKLOAD_HPP
