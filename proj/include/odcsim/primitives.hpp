#ifndef ODCSIM_PRIMITIVES_HPP
#define ODCSIM_PRIMITIVES_HPP

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "odcsim/types.hpp"

namespace odcsim {

// One staged gradient slice, bound for the rank owning that slice.
template <typename T>
struct GradMessage {
    int from_rank = 0;
    int target_rank = 0;
    std::int64_t offset = 0;  // within the target shard
    std::vector<T> payload;
    T weight{};
};

// Decentralized parameter-server state: every rank owns one contiguous block
// of the parameter/gradient space and keeps one staging slot per client.
// This class holds the shared state and the protocol rules; scheduling
// policy (who moves next) belongs to the drivers below.
template <typename T>
class ShardState {
public:
    ShardState(int ranks, std::int64_t elems)
        : ranks_(ranks), elems_(elems), block_((elems + ranks - 1) / ranks) {
        if (ranks < 1 || elems < 1) throw ParamError("need ranks >= 1 and elems >= 1");
        for (int r = 0; r < ranks; ++r) {
            grad_shards_.emplace_back(static_cast<std::size_t>(shard_len(r)), T{});
        }
        slots_.assign(static_cast<std::size_t>(ranks),
                      std::vector<std::optional<GradMessage<T>>>(static_cast<std::size_t>(ranks)));
        staged_elems_.assign(static_cast<std::size_t>(ranks), 0);
        max_staged_elems_.assign(static_cast<std::size_t>(ranks), 0);
    }

    int ranks() const { return ranks_; }
    std::int64_t elems() const { return elems_; }
    std::int64_t slot_capacity() const { return block_; }
    std::int64_t shard_begin(int rank) const { return std::min<std::int64_t>(elems_, rank * block_); }
    std::int64_t shard_len(int rank) const {
        return std::min<std::int64_t>(elems_, (rank + 1) * block_) - shard_begin(rank);
    }

    void set_params(const std::string& id, std::vector<T> full) {
        if (static_cast<std::int64_t>(full.size()) != elems_)
            throw ParamError("parameter vector length mismatch");
        auto& shards = params_[id];
        shards.clear();
        for (int r = 0; r < ranks_; ++r) {
            auto b = full.begin() + static_cast<std::ptrdiff_t>(shard_begin(r));
            shards.emplace_back(b, b + static_cast<std::ptrdiff_t>(shard_len(r)));
        }
    }

    // Read-only shard fetch; never blocks on or mutates server compute state.
    std::vector<T> gather(int /*client_rank*/, const std::string& id) const {
        auto it = params_.find(id);
        if (it == params_.end()) throw StateError("gather of uninitialized params '" + id + "'");
        std::vector<T> full;
        full.reserve(static_cast<std::size_t>(elems_));
        for (const auto& shard : it->second) full.insert(full.end(), shard.begin(), shard.end());
        return full;
    }

    // Splits a full-length gradient into one message per owner, in rank order.
    std::vector<GradMessage<T>> split_gradient(int from_rank, const std::vector<T>& grad,
                                               T weight) const {
        if (static_cast<std::int64_t>(grad.size()) != elems_)
            throw ParamError("gradient vector length mismatch");
        std::vector<GradMessage<T>> out;
        out.reserve(static_cast<std::size_t>(ranks_));
        for (int r = 0; r < ranks_; ++r) {
            GradMessage<T> m;
            m.from_rank = from_rank;
            m.target_rank = r;
            m.offset = 0;
            auto b = grad.begin() + static_cast<std::ptrdiff_t>(shard_begin(r));
            m.payload.assign(b, b + static_cast<std::ptrdiff_t>(shard_len(r)));
            m.weight = weight;
            out.push_back(std::move(m));
        }
        return out;
    }

    bool slot_free(int server, int client) const {
        return !slots_[static_cast<std::size_t>(server)][static_cast<std::size_t>(client)].has_value();
    }

    // Stages a message into its dedicated (server, client) buffer slot.
    // Returns false when the slot is still occupied by the previous message.
    bool try_stage(GradMessage<T> msg) {
        if (static_cast<std::int64_t>(msg.payload.size()) > block_)
            throw ProtocolError("payload of " + std::to_string(msg.payload.size()) +
                                " elements exceeds the per-client buffer slot of " +
                                std::to_string(block_));
        if (msg.offset < 0 ||
            msg.offset + static_cast<std::int64_t>(msg.payload.size()) > shard_len(msg.target_rank))
            throw ProtocolError("payload does not fit the target shard");
        auto& slot = slots_[static_cast<std::size_t>(msg.target_rank)][static_cast<std::size_t>(msg.from_rank)];
        if (slot.has_value()) return false;
        auto& staged = staged_elems_[static_cast<std::size_t>(msg.target_rank)];
        staged += static_cast<std::int64_t>(msg.payload.size());
        auto& peak = max_staged_elems_[static_cast<std::size_t>(msg.target_rank)];
        peak = std::max(peak, staged);
        slot = std::move(msg);
        return true;
    }

    // Daemon-side accumulation of one staged message. Only the owner mutates
    // its gradient shard.
    bool consume(int server, int client) {
        auto& slot = slots_[static_cast<std::size_t>(server)][static_cast<std::size_t>(client)];
        if (!slot.has_value()) return false;
        auto& shard = grad_shards_[static_cast<std::size_t>(server)];
        const GradMessage<T>& m = *slot;
        for (std::size_t i = 0; i < m.payload.size(); ++i)
            shard[static_cast<std::size_t>(m.offset) + i] += m.weight * m.payload[i];
        staged_elems_[static_cast<std::size_t>(server)] -=
            static_cast<std::int64_t>(m.payload.size());
        slot.reset();
        return true;
    }

    bool any_staged(int server) const {
        for (const auto& s : slots_[static_cast<std::size_t>(server)])
            if (s.has_value()) return true;
        return false;
    }

    std::vector<std::vector<T>> take_grads() {
        std::vector<std::vector<T>> out = grad_shards_;
        for (auto& shard : grad_shards_) std::fill(shard.begin(), shard.end(), T{});
        return out;
    }

    std::int64_t max_staged_elems(int server) const {
        return max_staged_elems_[static_cast<std::size_t>(server)];
    }

private:
    int ranks_;
    std::int64_t elems_;
    std::int64_t block_;
    std::map<std::string, std::vector<std::vector<T>>> params_;
    std::vector<std::vector<T>> grad_shards_;
    std::vector<std::vector<std::optional<GradMessage<T>>>> slots_;
    std::vector<std::int64_t> staged_elems_;
    std::vector<std::int64_t> max_staged_elems_;
};

// Immediate-mode fabric: a client's push stages its per-owner messages and
// drains any blocking slot inline. Semantically the fully-serial schedule.
template <typename T>
class ShardFabric {
public:
    ShardFabric(int ranks, std::int64_t elems) : state_(ranks, elems) {}

    ShardState<T>& state() { return state_; }

    void set_params(const std::string& id, std::vector<T> full) {
        state_.set_params(id, std::move(full));
    }
    std::vector<T> gather(int client_rank, const std::string& id) const {
        return state_.gather(client_rank, id);
    }

    void scatter_accumulate(int client_rank, const std::vector<T>& grad, T weight) {
        for (auto& msg : state_.split_gradient(client_rank, grad, weight)) {
            int target = msg.target_rank;
            while (!state_.slot_free(target, client_rank)) state_.consume(target, client_rank);
            if (!state_.try_stage(std::move(msg)))
                throw InvariantError("stage into a free slot failed");
        }
    }

    // Partial push of one slice; the error surface for buffer violations.
    void push_slice(int client_rank, int target_rank, std::int64_t offset, std::vector<T> payload,
                    T weight) {
        while (!state_.slot_free(target_rank, client_rank)) state_.consume(target_rank, client_rank);
        state_.try_stage(GradMessage<T>{client_rank, target_rank, offset, std::move(payload), weight});
    }

    // Drains every staged message (the one ODC barrier), returns the
    // accumulated shards and resets them for the next minibatch.
    std::vector<std::vector<T>> finalize_minibatch() {
        for (int s = 0; s < state_.ranks(); ++s)
            for (int c = 0; c < state_.ranks(); ++c) state_.consume(s, c);
        return state_.take_grads();
    }

private:
    ShardState<T> state_;
};

// Sequential reduce oracle: sum of weight * grad in input order.
template <typename T>
std::vector<T> collective_reduce_reference(
    const std::vector<std::pair<std::vector<T>, T>>& grads) {
    if (grads.empty()) throw ParamError("collective_reduce_reference needs at least one gradient");
    std::vector<T> acc(grads.front().first.size(), T{});
    for (const auto& [g, w] : grads) {
        if (g.size() != acc.size()) throw ParamError("gradient length mismatch");
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] += w * g[i];
    }
    return acc;
}

template <typename T>
struct ClientScript {
    std::vector<std::pair<std::vector<T>, T>> pushes;  // (full gradient, weight)
};

template <typename T>
struct ScheduleResult {
    std::vector<std::vector<T>> shards;
    std::int64_t max_staged_elems = 0;  // peak over all servers

    std::vector<T> concatenated() const {
        std::vector<T> out;
        for (const auto& s : shards) out.insert(out.end(), s.begin(), s.end());
        return out;
    }
};

// Single-threaded driver that replays one seeded random interleaving of
// client stages and daemon consumes. Always terminates: when every client is
// blocked on a full slot, the owning daemons are enabled.
template <typename T>
ScheduleResult<T> run_schedule(int ranks, std::int64_t elems,
                               const std::vector<ClientScript<T>>& clients, std::uint64_t seed) {
    ShardState<T> state(ranks, elems);
    struct Pending {
        std::vector<GradMessage<T>> queue;  // per-client FIFO, front = next
        std::size_t next = 0;
    };
    std::vector<Pending> pending(clients.size());
    for (std::size_t c = 0; c < clients.size(); ++c) {
        for (const auto& [grad, w] : clients[c].pushes) {
            auto msgs = state.split_gradient(static_cast<int>(c), grad, w);
            pending[c].queue.insert(pending[c].queue.end(), std::make_move_iterator(msgs.begin()),
                                    std::make_move_iterator(msgs.end()));
        }
    }

    std::mt19937_64 rng(seed);
    struct Action {
        bool is_stage;
        int a;  // client for stage, server for consume
        int b;  // unused for stage, client for consume
    };
    std::vector<Action> enabled;
    while (true) {
        enabled.clear();
        for (std::size_t c = 0; c < pending.size(); ++c) {
            const Pending& p = pending[c];
            if (p.next < p.queue.size() &&
                state.slot_free(p.queue[p.next].target_rank, static_cast<int>(c)))
                enabled.push_back({true, static_cast<int>(c), 0});
        }
        for (int s = 0; s < ranks; ++s)
            for (int c = 0; c < ranks; ++c)
                if (!state.slot_free(s, c)) enabled.push_back({false, s, c});
        if (enabled.empty()) break;
        const Action& act = enabled[rng() % enabled.size()];
        if (act.is_stage) {
            Pending& p = pending[static_cast<std::size_t>(act.a)];
            if (!state.try_stage(std::move(p.queue[p.next])))
                throw InvariantError("stage of an enabled action failed");
            ++p.next;
        } else {
            state.consume(act.a, act.b);
        }
    }

    ScheduleResult<T> result;
    for (int s = 0; s < ranks; ++s)
        result.max_staged_elems = std::max(result.max_staged_elems, state.max_staged_elems(s));
    result.shards = state.take_grads();
    return result;
}

// Multi-threaded driver: one thread per client, one accumulation daemon per
// server. Clients block only on their own full slot; daemons never initiate
// blocking operations, so no schedule can deadlock.
template <typename T>
ScheduleResult<T> run_threaded(int ranks, std::int64_t elems,
                               const std::vector<ClientScript<T>>& clients) {
    ShardState<T> state(ranks, elems);
    std::mutex mu;
    std::condition_variable cv;
    bool stopping = false;
    std::exception_ptr failure;

    auto client_fn = [&](int c) {
        try {
            for (const auto& [grad, w] : clients[static_cast<std::size_t>(c)].pushes) {
                for (auto& msg : state.split_gradient(c, grad, w)) {
                    std::unique_lock lk(mu);
                    cv.wait(lk, [&] { return state.slot_free(msg.target_rank, c) || failure; });
                    if (failure) return;
                    if (!state.try_stage(std::move(msg)))
                        throw InvariantError("stage into a free slot failed");
                    cv.notify_all();
                }
            }
        } catch (...) {
            std::lock_guard lk(mu);
            if (!failure) failure = std::current_exception();
            cv.notify_all();
        }
    };

    auto daemon_fn = [&](int s) {
        while (true) {
            std::unique_lock lk(mu);
            cv.wait(lk, [&] { return state.any_staged(s) || stopping || failure; });
            if (failure) return;
            bool did = false;
            for (int c = 0; c < ranks; ++c) did = state.consume(s, c) || did;
            if (did) cv.notify_all();
            if (stopping && !state.any_staged(s)) return;
        }
    };

    std::vector<std::thread> daemons;
    daemons.reserve(static_cast<std::size_t>(ranks));
    for (int s = 0; s < ranks; ++s) daemons.emplace_back(daemon_fn, s);
    std::vector<std::thread> workers;
    workers.reserve(clients.size());
    for (std::size_t c = 0; c < clients.size(); ++c) workers.emplace_back(client_fn, static_cast<int>(c));
    for (auto& t : workers) t.join();
    {
        std::lock_guard lk(mu);
        stopping = true;
    }
    cv.notify_all();
    for (auto& t : daemons) t.join();
    if (failure) std::rethrow_exception(failure);

    ScheduleResult<T> result;
    for (int s = 0; s < ranks; ++s)
        result.max_staged_elems = std::max(result.max_staged_elems, state.max_staged_elems(s));
    result.shards = state.take_grads();
    return result;
}

// Randomized equivalence suite behind the verify-primitives CLI subcommand.
struct PrimitivesVerifyReport {
    int passed = 0;
    int failed = 0;
    std::int64_t max_staged_elems = 0;
};
PrimitivesVerifyReport verify_primitives(int clients, int minibatches, std::uint64_t seed);

}  // namespace odcsim

#endif  // ODCSIM_PRIMITIVES_HPP
