#include "odcsim/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <random>
#include <sstream>

namespace odcsim {

Workload::Workload(std::vector<Sample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw ParamError("workload must contain at least one sample");
    for (const Sample& s : samples_) {
        if (s.length < 1) {
            throw ParamError("sample " + std::to_string(s.id) + " has non-positive length " +
                             std::to_string(s.length));
        }
        max_length_ = std::max(max_length_, s.length);
    }
}

std::vector<Tokens> Workload::lengths() const {
    std::vector<Tokens> out;
    out.reserve(samples_.size());
    for (const Sample& s : samples_) out.push_back(s.length);
    return out;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits of an mt19937_64 draw.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Tokens clamp_length(double raw, Tokens cap) {
    if (!std::isfinite(raw)) return cap;
    double rounded = std::round(raw);
    if (rounded < 1.0) return 1;
    if (rounded >= static_cast<double>(cap)) return cap;
    return static_cast<Tokens>(rounded);
}

struct DistSampler {
    std::mt19937_64& rng;
    Tokens cap;

    Tokens operator()(const LognormalDist& d) const {
        // Box-Muller; one normal per sample keeps the stream simple.
        double u1 = unit_uniform(rng);
        double u2 = unit_uniform(rng);
        double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
        return clamp_length(std::exp(d.mu + d.sigma * z), cap);
    }
    Tokens operator()(const ParetoDist& d) const {
        double u = unit_uniform(rng);
        return clamp_length(d.scale * std::pow(1.0 - u, -1.0 / d.shape), cap);
    }
    Tokens operator()(const UniformDist& d) const {
        auto span = static_cast<std::uint64_t>(d.hi - d.lo) + 1;
        return d.lo + static_cast<Tokens>(rng() % span);
    }
};

void validate_dist(const DistSpec& dist) {
    if (const auto* ln = std::get_if<LognormalDist>(&dist)) {
        if (!(ln->sigma > 0.0) || !std::isfinite(ln->mu) || !std::isfinite(ln->sigma))
            throw ParamError("lognormal requires finite mu and sigma > 0");
    } else if (const auto* pa = std::get_if<ParetoDist>(&dist)) {
        if (!(pa->scale > 0.0) || !(pa->shape > 0.0))
            throw ParamError("pareto requires scale > 0 and shape > 0");
    } else if (const auto* un = std::get_if<UniformDist>(&dist)) {
        if (un->lo < 1 || un->hi < un->lo)
            throw ParamError("uniform requires 1 <= lo <= hi");
    }
}

double parse_kv_double(const std::string& text, const std::string& key) {
    const std::string needle = key + "=";
    auto pos = text.find(needle);
    if (pos == std::string::npos) throw FormatError("distribution spec missing '" + key + "='");
    pos += needle.size();
    auto end = text.find(',', pos);
    const std::string val = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    try {
        std::size_t used = 0;
        double out = std::stod(val, &used);
        if (used != val.size()) throw FormatError("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw FormatError("bad value for '" + key + "' in distribution spec: '" + val + "'");
    }
}

}  // namespace

DistSpec parse_dist_spec(const std::string& text) {
    auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
    DistSpec out;
    if (name == "lognormal") {
        out = LognormalDist{parse_kv_double(args, "mu"), parse_kv_double(args, "sigma")};
    } else if (name == "pareto") {
        out = ParetoDist{parse_kv_double(args, "scale"), parse_kv_double(args, "shape")};
    } else if (name == "uniform") {
        out = UniformDist{static_cast<Tokens>(parse_kv_double(args, "lo")),
                          static_cast<Tokens>(parse_kv_double(args, "hi"))};
    } else {
        throw FormatError("unknown distribution '" + name +
                          "' (expected lognormal|pareto|uniform)");
    }
    validate_dist(out);
    return out;
}

std::string format_dist_spec(const DistSpec& dist) {
    std::ostringstream ss;
    if (const auto* ln = std::get_if<LognormalDist>(&dist)) {
        ss << "lognormal:mu=" << ln->mu << ",sigma=" << ln->sigma;
    } else if (const auto* pa = std::get_if<ParetoDist>(&dist)) {
        ss << "pareto:scale=" << pa->scale << ",shape=" << pa->shape;
    } else {
        const auto& un = std::get<UniformDist>(dist);
        ss << "uniform:lo=" << un.lo << ",hi=" << un.hi;
    }
    return ss.str();
}

Workload generate_synthetic(const DistSpec& dist, std::int64_t n, Tokens cap, std::uint64_t seed) {
    if (n < 1) throw ParamError("sample count must be >= 1");
    if (cap < 1) throw ParamError("length cap must be >= 1");
    validate_dist(dist);
    std::mt19937_64 rng(seed);
    DistSampler sampler{rng, cap};
    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        samples.push_back(Sample{i, std::visit(sampler, dist)});
    }
    return Workload(std::move(samples));
}

Workload load_lengths(std::istream& in) {
    std::vector<Sample> samples;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;  // blank line
        std::size_t e = line.find_last_not_of(" \t\r");
        Tokens value = 0;
        auto [ptr, ec] = std::from_chars(line.data() + b, line.data() + e + 1, value);
        if (ec != std::errc() || ptr != line.data() + e + 1) {
            throw FormatError("line " + std::to_string(line_no) + ": not an integer: '" +
                              line.substr(b, e - b + 1) + "'");
        }
        if (value < 1) {
            throw FormatError("line " + std::to_string(line_no) + ": length must be positive, got " +
                              std::to_string(value));
        }
        samples.push_back(Sample{static_cast<std::int64_t>(samples.size()), value});
    }
    if (samples.empty()) throw FormatError("no lengths found in input");
    return Workload(std::move(samples));
}

Workload load_lengths_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open length file: " + path);
    return load_lengths(in);
}

Workload scale_lengths(const Workload& w, double ratio) {
    if (!(ratio > 0.0)) throw ParamError("scale ratio must be > 0");
    std::vector<Sample> samples = w.samples();
    for (Sample& s : samples) {
        auto scaled = std::llround(static_cast<double>(s.length) * ratio);
        s.length = std::max<Tokens>(1, scaled);
    }
    return Workload(std::move(samples));
}

namespace {
// Nearest-rank quantile: smallest element with at least p of the mass at or
// below it.
Tokens nearest_rank(const std::vector<Tokens>& sorted, double p) {
    auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n));
    if (rank < 1) rank = 1;
    return sorted[rank - 1];
}
}  // namespace

WorkloadStats summarize(const Workload& w) {
    std::vector<Tokens> sorted = w.lengths();
    std::sort(sorted.begin(), sorted.end());
    WorkloadStats st;
    st.count = static_cast<std::int64_t>(sorted.size());
    st.min = sorted.front();
    st.max = sorted.back();
    st.total = 0;
    for (Tokens t : sorted) st.total += t;
    st.mean = static_cast<double>(st.total) / static_cast<double>(st.count);
    st.p50 = nearest_rank(sorted, 0.50);
    st.p90 = nearest_rank(sorted, 0.90);
    st.p99 = nearest_rank(sorted, 0.99);
    return st;
}

}  // namespace odcsim
