#include "odcsim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>

namespace odcsim {

namespace {

struct KkPart {
    double sum = 0.0;
    int min_index = std::numeric_limits<int>::max();
    std::vector<int> items;
};

// Sort key inside a tuple: largest sum first, ties to the lowest index.
bool part_before(const KkPart& a, const KkPart& b) {
    if (a.sum != b.sum) return a.sum > b.sum;
    return a.min_index < b.min_index;
}

struct KkState {
    std::vector<KkPart> parts;  // kept sorted by part_before
    int min_index = std::numeric_limits<int>::max();

    double spread() const { return parts.front().sum - parts.back().sum; }
};

struct StateOrder {
    // priority_queue top = widest spread, ties to the lowest original index.
    bool operator()(const KkState& a, const KkState& b) const {
        if (a.spread() != b.spread()) return a.spread() < b.spread();
        return a.min_index > b.min_index;
    }
};

KkState merge_states(KkState a, KkState&& b) {
    const std::size_t k = a.parts.size();
    for (std::size_t i = 0; i < k; ++i) {
        KkPart& dst = a.parts[i];
        KkPart& src = b.parts[k - 1 - i];
        dst.sum += src.sum;
        dst.min_index = std::min(dst.min_index, src.min_index);
        dst.items.insert(dst.items.end(), src.items.begin(), src.items.end());
    }
    std::sort(a.parts.begin(), a.parts.end(), part_before);
    a.min_index = std::min(a.min_index, b.min_index);
    return a;
}

PartitionResult finish(KkState state) {
    PartitionResult res;
    res.parts.reserve(state.parts.size());
    res.sums.reserve(state.parts.size());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (KkPart& p : state.parts) {
        std::sort(p.items.begin(), p.items.end());
        lo = std::min(lo, p.sum);
        hi = std::max(hi, p.sum);
        res.parts.push_back(std::move(p.items));
        res.sums.push_back(p.sum);
    }
    res.spread = state.parts.empty() ? 0.0 : hi - lo;
    return res;
}

std::vector<int> indices_by_cost_desc(std::span<const double> costs) {
    std::vector<int> order(costs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (costs[a] != costs[b]) return costs[a] > costs[b];
        return a < b;
    });
    return order;
}

}  // namespace

PartitionResult kk_partition(std::span<const double> costs, int k, bool equal_size) {
    if (k < 1) throw ParamError("kk_partition requires k >= 1");
    const int n = static_cast<int>(costs.size());
    if (equal_size && n % k != 0) {
        throw ParamError("equal_size requires k to divide the input size (" + std::to_string(k) +
                         " does not divide " + std::to_string(n) + ")");
    }

    std::priority_queue<KkState, std::vector<KkState>, StateOrder> heap;
    if (equal_size) {
        const std::vector<int> order = indices_by_cost_desc(costs);
        for (int g = 0; g < n / k; ++g) {
            KkState st;
            st.parts.resize(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) {
                int idx = order[static_cast<std::size_t>(g) * k + i];
                st.parts[static_cast<std::size_t>(i)] = KkPart{costs[idx], idx, {idx}};
                st.min_index = std::min(st.min_index, idx);
            }
            heap.push(std::move(st));
        }
    } else {
        for (int idx = 0; idx < n; ++idx) {
            KkState st;
            st.parts.resize(static_cast<std::size_t>(k));
            st.parts[0] = KkPart{costs[idx], idx, {idx}};
            st.min_index = idx;
            heap.push(std::move(st));
        }
    }

    if (heap.empty()) {
        KkState st;
        st.parts.resize(static_cast<std::size_t>(k));
        return finish(std::move(st));
    }
    while (heap.size() > 1) {
        KkState a = heap.top();
        heap.pop();
        KkState b = heap.top();
        heap.pop();
        heap.push(merge_states(std::move(a), std::move(b)));
    }
    return finish(heap.top());
}

namespace {

struct BruteSearch {
    std::span<const double> costs;
    std::vector<int> order;  // descending cost, for pruning
    int k = 0;
    int cap = 0;  // per-part size cap when equal_size, else n
    std::vector<double> sums;
    std::vector<int> counts;
    std::vector<int> assign;       // position in `order` -> part
    std::vector<int> best_assign;  // copy of assign at the best leaf
    double best_spread = std::numeric_limits<double>::infinity();
    std::vector<double> suffix_total;

    void run(std::size_t pos, int used) {
        const int n = static_cast<int>(order.size());
        if (pos == order.size()) {
            double hi = *std::max_element(sums.begin(), sums.end());
            double lo = *std::min_element(sums.begin(), sums.end());
            if (hi - lo < best_spread) {
                best_spread = hi - lo;
                best_assign = assign;
            }
            return;
        }
        // The final max is at least the current max; the final min can grow by
        // at most the unassigned total. Prune when even that cannot beat best.
        double cur_hi = *std::max_element(sums.begin(), sums.end());
        double cur_lo = *std::min_element(sums.begin(), sums.end());
        if (cur_hi - (cur_lo + suffix_total[pos]) >= best_spread) return;

        const double c = costs[order[pos]];
        // Restricted-growth labeling: only the first unused part may be opened,
        // which removes part-permutation duplicates. The per-part size cap
        // alone enforces equal sizes: counts never exceed cap and the totals
        // force every part to exactly cap at a leaf.
        const int limit = std::min(used + 1, k);
        for (int p = 0; p < limit; ++p) {
            if (counts[p] >= cap) continue;
            sums[p] += c;
            ++counts[p];
            assign[pos] = p;
            run(pos + 1, std::max(used, p + 1));
            sums[p] -= c;
            --counts[p];
        }
        (void)n;
    }
};

}  // namespace

PartitionResult brute_force_partition(std::span<const double> costs, int k, bool equal_size) {
    if (k < 1) throw ParamError("brute_force_partition requires k >= 1");
    const int n = static_cast<int>(costs.size());
    if (n > 14) throw ParamError("brute_force_partition is limited to 14 items, got " +
                                 std::to_string(n));
    if (equal_size && n % k != 0)
        throw ParamError("equal_size requires k to divide the input size");

    BruteSearch search;
    search.costs = costs;
    search.order = indices_by_cost_desc(costs);
    search.k = k;
    search.cap = equal_size ? n / k : n;
    search.sums.assign(static_cast<std::size_t>(k), 0.0);
    search.counts.assign(static_cast<std::size_t>(k), 0);
    search.assign.assign(costs.size(), 0);
    search.suffix_total.assign(costs.size() + 1, 0.0);
    for (int i = n - 1; i >= 0; --i)
        search.suffix_total[static_cast<std::size_t>(i)] =
            search.suffix_total[static_cast<std::size_t>(i) + 1] + costs[search.order[static_cast<std::size_t>(i)]];
    search.run(0, 0);

    PartitionResult res;
    res.parts.assign(static_cast<std::size_t>(k), {});
    res.sums.assign(static_cast<std::size_t>(k), 0.0);
    for (std::size_t pos = 0; pos < search.order.size(); ++pos) {
        int part = search.best_assign[pos];
        int idx = search.order[pos];
        res.parts[static_cast<std::size_t>(part)].push_back(idx);
        res.sums[static_cast<std::size_t>(part)] += costs[idx];
    }
    for (auto& p : res.parts) std::sort(p.begin(), p.end());
    if (n == 0) {
        res.spread = 0.0;
    } else {
        auto [lo, hi] = std::minmax_element(res.sums.begin(), res.sums.end());
        res.spread = *hi - *lo;
    }
    return res;
}

PartitionResult minibatch_partition(std::span<const Tokens> seqlens, int world_size,
                                    bool equal_size, const CostModel& cost) {
    if (world_size < 1) throw ParamError("world_size must be >= 1");
    cost.validate();
    std::vector<double> costs;
    costs.reserve(seqlens.size());
    for (Tokens s : seqlens) costs.push_back(compute_cost(cost, s));
    return kk_partition(costs, world_size, equal_size);
}

namespace {

bool parts_fit(const std::vector<std::vector<int>>& parts, std::span<const Sample> samples,
               const MemoryBudget& budget) {
    std::vector<Tokens> lens;
    for (const auto& part : parts) {
        lens.clear();
        for (int idx : part) lens.push_back(samples[static_cast<std::size_t>(idx)].length);
        if (!lens.empty() && check_oom(lens, budget)) return false;
    }
    return true;
}

void require_fits_alone(std::span<const Sample> samples, const MemoryBudget& budget) {
    for (const Sample& s : samples) {
        if (s.length > budget.max_tokens_per_microbatch) {
            throw InfeasibleError("sample " + std::to_string(s.id) + " has length " +
                                  std::to_string(s.length) + " exceeding the microbatch budget of " +
                                  std::to_string(budget.max_tokens_per_microbatch) + " tokens");
        }
    }
}

std::vector<std::vector<int>> kk_parts_for(std::span<const Sample> samples, int k,
                                           const CostModel& cost) {
    std::vector<double> costs;
    costs.reserve(samples.size());
    for (const Sample& s : samples) costs.push_back(compute_cost(cost, s.length));
    return kk_partition(costs, k, /*equal_size=*/false).parts;
}

}  // namespace

std::vector<std::vector<int>> microbatch_partition(std::span<const Sample> samples,
                                                   const MemoryBudget& budget,
                                                   const CostModel& cost) {
    require_fits_alone(samples, budget);
    const int n = static_cast<int>(samples.size());
    for (int k = 1;; ++k) {
        auto parts = kk_parts_for(samples, k, cost);
        if (parts_fit(parts, samples, budget)) return parts;
        if (k >= n) throw InvariantError("microbatch partition failed at k == n");
    }
}

namespace {

// Grows a feasible packing to exactly k parts by splitting the heaviest
// multi-sample part (2-way differencing), appending empty parts once only
// singletons remain. Splitting never increases a token sum, so feasibility
// is preserved.
std::vector<std::vector<int>> split_to_k(std::vector<std::vector<int>> parts, int k,
                                         std::span<const Sample> samples,
                                         const CostModel& cost) {
    while (static_cast<int>(parts.size()) < k) {
        int best = -1;
        Tokens best_tokens = -1;
        int best_min_idx = std::numeric_limits<int>::max();
        for (std::size_t p = 0; p < parts.size(); ++p) {
            if (parts[p].size() < 2) continue;
            Tokens sum = 0;
            int min_idx = std::numeric_limits<int>::max();
            for (int idx : parts[p]) {
                sum += samples[static_cast<std::size_t>(idx)].length;
                min_idx = std::min(min_idx, idx);
            }
            if (sum > best_tokens || (sum == best_tokens && min_idx < best_min_idx)) {
                best = static_cast<int>(p);
                best_tokens = sum;
                best_min_idx = min_idx;
            }
        }
        if (best < 0) {
            parts.emplace_back();
            continue;
        }
        std::vector<int> whole = std::move(parts[static_cast<std::size_t>(best)]);
        std::vector<double> costs;
        costs.reserve(whole.size());
        for (int idx : whole) costs.push_back(compute_cost(cost, samples[static_cast<std::size_t>(idx)].length));
        auto halves = kk_partition(costs, 2, false).parts;
        for (auto& half : halves)
            for (int& local : half) local = whole[static_cast<std::size_t>(local)];
        parts[static_cast<std::size_t>(best)] = std::move(halves[0]);
        parts.push_back(std::move(halves[1]));
    }
    return parts;
}

}  // namespace

std::vector<std::vector<std::vector<int>>> microbatch_partition_joint(
    const std::vector<std::vector<Sample>>& per_device, const MemoryBudget& budget,
    const CostModel& cost) {
    // Centrally simulated all-reduce: the group count is the largest k any
    // device's own feasibility loop required.
    std::vector<std::vector<std::vector<int>>> solo;
    solo.reserve(per_device.size());
    int k_star = 1;
    for (const auto& dev : per_device) {
        solo.push_back(microbatch_partition(dev, budget, cost));
        k_star = std::max(k_star, static_cast<int>(solo.back().size()));
    }
    std::vector<std::vector<std::vector<int>>> out;
    out.reserve(per_device.size());
    for (std::size_t d = 0; d < per_device.size(); ++d) {
        auto parts = kk_parts_for(per_device[d], k_star, cost);
        if (!parts_fit(parts, per_device[d], budget)) {
            // Cost balancing is not monotone in k on rare instances; fall back
            // to splitting this device's own feasible minimal packing.
            parts = split_to_k(std::move(solo[d]), k_star, per_device[d], cost);
        }
        out.push_back(std::move(parts));
    }
    return out;
}

std::int64_t BatchingSolution::sample_count() const {
    std::int64_t n = 0;
    for (const auto& dev : per_device)
        for (const auto& mb : dev) n += static_cast<std::int64_t>(mb.sample_ids.size());
    return n;
}

Strategy parse_strategy(const std::string& name) {
    if (name == "local-sort") return Strategy::LocalSort;
    if (name == "lb-micro") return Strategy::LbMicro;
    if (name == "lb-mini") return Strategy::LbMini;
    if (name == "verl-native") return Strategy::VerlNative;
    if (name == "verl-optimized") return Strategy::VerlOptimized;
    throw ParamError("unknown strategy '" + name +
                     "' (expected local-sort|lb-micro|lb-mini|verl-native|verl-optimized)");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::LocalSort: return "local-sort";
        case Strategy::LbMicro: return "lb-micro";
        case Strategy::LbMini: return "lb-mini";
        case Strategy::VerlNative: return "verl-native";
        case Strategy::VerlOptimized: return "verl-optimized";
    }
    throw InvariantError("unreachable strategy");
}

namespace {

// Fisher-Yates with an explicit draw so results do not depend on the standard
// library's std::shuffle implementation.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng() % i]);
    }
}

Microbatch make_microbatch(std::span<const Sample> pool, const std::vector<int>& indices) {
    Microbatch mb;
    for (int idx : indices) {
        const Sample& s = pool[static_cast<std::size_t>(idx)];
        mb.sample_ids.push_back(s.id);
        mb.lengths.push_back(s.length);
        mb.token_sum += s.length;
    }
    return mb;
}

std::vector<Sample> select(std::span<const Sample> pool, const std::vector<int>& indices) {
    std::vector<Sample> out;
    out.reserve(indices.size());
    for (int idx : indices) out.push_back(pool[static_cast<std::size_t>(idx)]);
    return out;
}

BatchingSolution solution_from_joint(const std::vector<std::vector<Sample>>& device_pools,
                                     const std::vector<std::vector<std::vector<int>>>& joint,
                                     int minibatch_size, int step_index, bool partial) {
    BatchingSolution sol;
    sol.mode = BatchingMode::EqualMicro;
    sol.minibatch_size_per_device = minibatch_size;
    sol.step_index = step_index;
    sol.partial = partial;
    for (std::size_t d = 0; d < device_pools.size(); ++d) {
        std::vector<Microbatch> mbs;
        for (const auto& part : joint[d]) mbs.push_back(make_microbatch(device_pools[d], part));
        sol.per_device.push_back(std::move(mbs));
    }
    return sol;
}

BatchingSolution plan_local_sort(std::span<const Sample> pool, int devices, int minibatch_size,
                                 int step_index, bool partial) {
    std::vector<Sample> sorted(pool.begin(), pool.end());
    std::sort(sorted.begin(), sorted.end(), [](const Sample& a, const Sample& b) {
        if (a.length != b.length) return a.length > b.length;
        return a.id < b.id;
    });
    BatchingSolution sol;
    sol.mode = BatchingMode::EqualMicro;
    sol.minibatch_size_per_device = minibatch_size;
    sol.step_index = step_index;
    sol.partial = partial;
    sol.per_device.assign(static_cast<std::size_t>(devices), {});
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        Microbatch mb;
        mb.sample_ids.push_back(sorted[i].id);
        mb.lengths.push_back(sorted[i].length);
        mb.token_sum = sorted[i].length;
        sol.per_device[i % static_cast<std::size_t>(devices)].push_back(std::move(mb));
    }
    std::size_t max_count = 0;
    for (const auto& dev : sol.per_device) max_count = std::max(max_count, dev.size());
    for (auto& dev : sol.per_device) dev.resize(max_count);  // empty-microbatch padding
    return sol;
}

BatchingSolution plan_balanced_step(std::span<const Sample> pool, int devices, int minibatch_size,
                                    const MemoryBudget& budget, const CostModel& cost,
                                    bool lb_mini, int step_index, bool partial) {
    // Equal sample counts per device require divisibility; a trailing partial
    // step falls back to the unconstrained split.
    const bool equal_size = !lb_mini && pool.size() % static_cast<std::size_t>(devices) == 0;
    if (!lb_mini && !equal_size) {
        log_warn("step " + std::to_string(step_index) +
                 ": pool not divisible by devices, dropping the equal-size constraint");
    }
    std::vector<Tokens> lens;
    lens.reserve(pool.size());
    for (const Sample& s : pool) lens.push_back(s.length);
    PartitionResult device_split = minibatch_partition(lens, devices, equal_size, cost);

    std::vector<std::vector<Sample>> device_pools;
    device_pools.reserve(static_cast<std::size_t>(devices));
    for (const auto& part : device_split.parts) device_pools.push_back(select(pool, part));

    if (lb_mini) {
        BatchingSolution sol;
        sol.mode = BatchingMode::VariableMicro;
        sol.minibatch_size_per_device = minibatch_size;
        sol.step_index = step_index;
        sol.partial = partial;
        for (const auto& dev : device_pools) {
            std::vector<Microbatch> mbs;
            if (!dev.empty()) {
                for (const auto& part : microbatch_partition(dev, budget, cost))
                    mbs.push_back(make_microbatch(dev, part));
            }
            sol.per_device.push_back(std::move(mbs));
        }
        return sol;
    }
    auto joint = microbatch_partition_joint(device_pools, budget, cost);
    return solution_from_joint(device_pools, joint, minibatch_size, step_index, partial);
}

}  // namespace

PlanResult plan(Strategy strategy, const Workload& w, int devices, int minibatch_size,
                const MemoryBudget& budget, const CostModel& cost, std::uint64_t seed) {
    if (devices < 1) throw ParamError("devices must be >= 1");
    if (minibatch_size < 1) throw ParamError("minibatch_size must be >= 1");
    cost.validate();
    if (budget.max_tokens_per_microbatch < w.max_length()) {
        throw InfeasibleError("microbatch budget " +
                              std::to_string(budget.max_tokens_per_microbatch) +
                              " is below the max sample length " + std::to_string(w.max_length()));
    }

    const std::vector<Sample>& all = w.samples();
    PlanResult result;
    const std::size_t step_span = static_cast<std::size_t>(devices) * static_cast<std::size_t>(minibatch_size);

    if (strategy == Strategy::VerlNative) {
        // The native two-level scheme needs identical sample counts per rank;
        // the remainder of the global pool is dropped.
        std::size_t keep = all.size() - all.size() % static_cast<std::size_t>(devices);
        for (std::size_t i = keep; i < all.size(); ++i) result.dropped_ids.push_back(all[i].id);
        if (!result.dropped_ids.empty()) {
            log_warn("verl-native: dropping " + std::to_string(result.dropped_ids.size()) +
                     " trailing samples to make the pool divisible by " + std::to_string(devices));
        }
        if (keep == 0) throw ParamError("workload smaller than the device count");
        std::span<const Sample> kept(all.data(), keep);

        std::vector<Tokens> lens;
        lens.reserve(keep);
        for (const Sample& s : kept) lens.push_back(s.length);
        PartitionResult split = minibatch_partition(lens, devices, /*equal_size=*/true, cost);

        std::vector<std::vector<Sample>> rank_pools;
        for (int d = 0; d < devices; ++d) {
            auto pool = select(kept, split.parts[static_cast<std::size_t>(d)]);
            std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(d + 1));
            seeded_shuffle(pool, rng);
            rank_pools.push_back(std::move(pool));
        }
        const std::size_t per_rank = rank_pools.front().size();
        const std::size_t steps = (per_rank + static_cast<std::size_t>(minibatch_size) - 1) /
                                  static_cast<std::size_t>(minibatch_size);
        for (std::size_t m = 0; m < steps; ++m) {
            std::vector<std::vector<Sample>> device_minibatches;
            bool partial = false;
            for (int d = 0; d < devices; ++d) {
                std::size_t b = m * static_cast<std::size_t>(minibatch_size);
                std::size_t e = std::min(per_rank, b + static_cast<std::size_t>(minibatch_size));
                partial = partial || (e - b) < static_cast<std::size_t>(minibatch_size);
                device_minibatches.emplace_back(rank_pools[static_cast<std::size_t>(d)].begin() + static_cast<std::ptrdiff_t>(b),
                                                rank_pools[static_cast<std::size_t>(d)].begin() + static_cast<std::ptrdiff_t>(e));
            }
            auto joint = microbatch_partition_joint(device_minibatches, budget, cost);
            result.steps.push_back(solution_from_joint(device_minibatches, joint, minibatch_size,
                                                       static_cast<int>(m), partial));
        }
        return result;
    }

    // The remaining strategies consume the pool in optimizer-step chunks of
    // devices * minibatch_size samples.
    std::vector<Sample> ordered = all;
    if (strategy == Strategy::VerlOptimized) {
        std::mt19937_64 rng(seed);
        seeded_shuffle(ordered, rng);
    }
    int step_index = 0;
    for (std::size_t begin = 0; begin < ordered.size(); begin += step_span, ++step_index) {
        std::size_t end = std::min(ordered.size(), begin + step_span);
        std::span<const Sample> pool(ordered.data() + begin, end - begin);
        bool partial = pool.size() < step_span;
        switch (strategy) {
            case Strategy::LocalSort:
                result.steps.push_back(plan_local_sort(pool, devices, minibatch_size, step_index, partial));
                break;
            case Strategy::LbMicro:
            case Strategy::VerlOptimized:
                result.steps.push_back(plan_balanced_step(pool, devices, minibatch_size, budget, cost,
                                                          /*lb_mini=*/false, step_index, partial));
                break;
            case Strategy::LbMini:
                result.steps.push_back(plan_balanced_step(pool, devices, minibatch_size, budget, cost,
                                                          /*lb_mini=*/true, step_index, partial));
                break;
            case Strategy::VerlNative:
                throw InvariantError("unreachable");
        }
    }
    if (result.steps.empty()) throw ParamError("workload produced no steps");
    return result;
}

}  // namespace odcsim
