#include "fuseforge/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "fuseforge/errors.hpp"

namespace fuseforge {

namespace {

// Wire framing used for byte accounting: receiver and sender ids per
// mailbox message, a partition id prepended by merged senders, and a cache id
// plus one presence byte per slot for caches.
constexpr std::uint64_t kEnvelopeHeaderBytes = 16;
constexpr std::uint64_t kPartitionHeaderBytes = 4;
constexpr std::uint64_t kCacheHeaderBytes = 8;

std::uint64_t payload_bytes(const Value& v) {
    switch (tag_of(v)) {
        case TypeTag::Bool: return 1;
        case TypeTag::Int:
        case TypeTag::Float: return 8;
        case TypeTag::Record: return 8 * std::get<Record>(v).fields.size();
    }
    return 0;
}

enum class ReadKind : std::uint8_t { Local, Cache, Lookup };

struct Read {
    AgentId sender = 0;
    ReadKind kind = ReadKind::Local;
    int cache = -1;
    std::int64_t slot = -1;
};

struct Envelope {
    AgentId receiver = 0;
    AgentId sender = 0;
    Value payload;
};

struct Aggregator {
    AgentId id = 0;
    AgentId target = 0;
    PartitionId host = 0;
    bool merged = false;
    const ComputeMethodContract* contract = nullptr;
    std::vector<AgentId> senders;
};

struct alignas(64) Counters {
    std::uint64_t logical = 0;
    std::uint64_t wire = 0;
    std::uint64_t wireBytes = 0;
    std::uint64_t target = 0;
    std::uint64_t sent = 0;
    std::uint64_t consumed = 0;
};

struct Inbox {
    std::vector<std::size_t> start;
    std::vector<InMessage> msgs;
};

// Aggregated values (negative senders) are already in-messages; everything
// else goes through the receiver's deserialize.
void finish_delivery(const ComputeMethodContract& c, AgentId receiver, InMessage* first, InMessage* last) {
    for (InMessage* m = first; m != last; ++m) {
        if (m->sender >= 0 && c.deserialize) m->payload = c.deserialize(m->payload);
        if (tag_of(m->payload) != c.inMessageType) {
            throw ContractError("message from x" + std::to_string(m->sender) + " to x" + std::to_string(receiver) +
                                " is " + tag_name(tag_of(m->payload)) + ", contract " + c.id + " expects " +
                                tag_name(c.inMessageType));
        }
    }
    if (last - first > 1) {
        std::stable_sort(first, last, [](const InMessage& x, const InMessage& y) { return x.sender < y.sender; });
    }
}

} // namespace

std::uint64_t checksum(const std::vector<Value>& values) {
    std::uint64_t h = mix64(values.size());
    for (const auto& v : values) h = hash_combine_value(h, v);
    return h;
}

double Metrics::mean_round_ms() const {
    if (roundMs.empty()) return 0.0;
    return std::accumulate(roundMs.begin(), roundMs.end(), 0.0) / static_cast<double>(roundMs.size());
}

std::uint64_t Metrics::total(const std::vector<std::uint64_t>& perRound) {
    return std::accumulate(perRound.begin(), perRound.end(), std::uint64_t{0});
}

std::vector<InMessage> deliver(const ComputeMethodContract& receiver, AgentId receiverId, std::vector<InMessage> raw) {
    finish_delivery(receiver, receiverId, raw.data(), raw.data() + raw.size());
    return raw;
}

struct Executor::Impl {
    const Simulation& sim;
    ThreadPool pool;
    std::size_t n = 0;
    std::size_t partitions = 0;

    std::vector<const ComputeMethodContract*> contract;
    std::vector<PartitionId> partOf;
    std::vector<std::uint32_t> localIndex;
    std::vector<std::size_t> memberCount;
    std::vector<std::vector<AgentId>> memberList;  // by local index
    std::vector<std::uint8_t> mergedSender;

    std::vector<AgentId> unitOrder;
    std::vector<std::size_t> unitStart;

    std::vector<std::size_t> readStart;
    std::vector<Read> reads;
    std::vector<std::uint8_t> usesMailbox;
    std::vector<std::size_t> routeStart;
    std::vector<AgentId> routes;
    std::vector<std::size_t> writeStart;
    std::vector<std::int64_t> writes;
    std::vector<std::uint64_t> readerCount;

    std::vector<MessageCache> caches;
    std::vector<std::int64_t> cacheBase;
    std::size_t slotCount = 0;
    std::vector<Aggregator> aggregators;
    bool anyDoubleBuffered = false;
    AgentId watch = -1;
    PassTimes passMs{};

    // Per-run state.
    std::vector<Value> values[2];
    std::vector<std::optional<Value>> outbox[2];
    std::vector<std::optional<Value>> slots[2];
    std::vector<Inbox> inbox;
    std::vector<std::vector<std::vector<Envelope>>> shards;  // [worker][destination partition]
    std::vector<Counters> counters;
    std::vector<std::vector<Value>> scratch;
    std::uint64_t seed = 0;

    Impl(const OptimizedProgram& program, const Simulation& s, int threads);
    void link(const OptimizedProgram& program);
    const std::optional<Value>& read_slot(const Read& r, int bank, AgentId reader) const;
    void compute(AgentId a, std::int64_t superstep, int cur, int worker);
    void publish(AgentId a, int bank, int worker);
    void aggregate(const Aggregator& g, int bank, int worker);
    void deliver_partition(std::size_t p);
    Counters phase(std::int64_t superstep, int cur, bool priming);
    ExecutionResult run(std::int64_t rounds, std::uint64_t seed);
};

Executor::Impl::Impl(const OptimizedProgram& program, const Simulation& s, int threads) : sim(s), pool(threads) {
    n = sim.agent_count();
    partitions = program.plans.size();
    passMs = program.passMs;
    if (sim.watch) watch = *sim.watch;
    link(program);
}

void Executor::Impl::link(const OptimizedProgram& program) {
    contract.resize(n);
    for (std::size_t a = 0; a < n; ++a) contract[a] = &sim.contract_of(static_cast<AgentId>(a));
    partOf.assign(n, -1);
    localIndex.assign(n, 0);
    memberCount.assign(partitions, 0);
    memberList.assign(partitions, {});
    mergedSender.assign(n, 0);

    std::vector<const AgentPlan*> planOf(n, nullptr);
    for (std::size_t p = 0; p < partitions; ++p) {
        const auto& plan = program.plans[p];
        if (plan.partition.id != static_cast<PartitionId>(p)) throw StructuralError("plans must be indexed by partition id");
        for (const auto& [a, ap] : plan.perAgent) {
            if (a < 0 || static_cast<std::size_t>(a) >= n) {
                throw CoverageError("plan " + std::to_string(p) + " covers unknown agent " + std::to_string(a));
            }
            if (planOf[static_cast<std::size_t>(a)] != nullptr) {
                throw CoverageError("agent " + std::to_string(a) + " is covered by two plans");
            }
            planOf[static_cast<std::size_t>(a)] = &ap;
            partOf[static_cast<std::size_t>(a)] = static_cast<PartitionId>(p);
            localIndex[static_cast<std::size_t>(a)] = static_cast<std::uint32_t>(memberCount[p]++);
            memberList[p].push_back(a);
            mergedSender[static_cast<std::size_t>(a)] = plan.merged ? 1 : 0;
        }
        if (plan.mergedOrder.size() != plan.perAgent.size()) {
            throw CoverageError("merged order of plan " + std::to_string(p) + " does not list every member once");
        }
        anyDoubleBuffered = anyDoubleBuffered || plan.doubleBuffered;
        unitStart.push_back(unitOrder.size());
        for (AgentId a : plan.mergedOrder) {
            if (plan.perAgent.count(a) == 0) throw CoverageError("merged order lists non-member " + std::to_string(a));
            if (!plan.merged) unitStart.push_back(unitOrder.size());
            unitOrder.push_back(a);
        }
        if (!plan.merged && !plan.mergedOrder.empty()) unitStart.pop_back();
        if (plan.merged && plan.mergedOrder.empty()) unitStart.pop_back();
    }
    unitStart.push_back(unitOrder.size());
    // Collapse duplicate starts produced by empty plans.
    unitStart.erase(std::unique(unitStart.begin(), unitStart.end()), unitStart.end());
    for (std::size_t a = 0; a < n; ++a) {
        if (planOf[a] == nullptr) throw CoverageError("agent " + std::to_string(a) + " is covered by no plan");
    }

    caches = program.caches;
    cacheBase.resize(caches.size());
    for (std::size_t c = 0; c < caches.size(); ++c) {
        if (caches[c].id != static_cast<int>(c)) throw StructuralError("caches must be indexed by id");
        cacheBase[c] = static_cast<std::int64_t>(slotCount);
        slotCount += caches[c].schema.size();
    }

    std::vector<std::vector<AgentId>> routeLists(n);
    std::vector<std::vector<std::int64_t>> writeLists(n);
    readerCount.assign(n, 0);
    readStart.assign(n + 1, 0);
    usesMailbox.assign(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
        const AgentPlan& ap = *planOf[a];
        const auto receiver = static_cast<AgentId>(a);
        for (const auto& r : sim.equations[a].referenceSet) ++readerCount[static_cast<std::size_t>(r.agent)];
        readStart[a] = reads.size();
        for (const auto& e : ap.program) {
            const AgentId sender = e.ref.agent;
            switch (e.kind) {
                case StagedExpr::Kind::Message:
                    usesMailbox[a] = 1;
                    if (sender >= 0) routeLists[static_cast<std::size_t>(sender)].push_back(receiver);
                    break;
                case StagedExpr::Kind::LocalRead:
                    if (e.buffer != Buffer::Previous) {
                        throw StructuralError("agent programs may only read the previous buffer");
                    }
                    reads.push_back(Read{sender, ReadKind::Local});
                    break;
                case StagedExpr::Kind::CacheRead: {
                    if (e.cache < 0 || static_cast<std::size_t>(e.cache) >= caches.size() ||
                        e.offset < 0 || static_cast<std::size_t>(e.offset) >= caches[static_cast<std::size_t>(e.cache)].schema.size() ||
                        caches[static_cast<std::size_t>(e.cache)].schema[static_cast<std::size_t>(e.offset)] != e.ref) {
                        throw StructuralError("stale cache offset " + to_string(e) + " in x" + std::to_string(a));
                    }
                    reads.push_back(Read{sender, ReadKind::Cache, e.cache,
                                         cacheBase[static_cast<std::size_t>(e.cache)] + e.offset});
                    break;
                }
                case StagedExpr::Kind::CacheLookup:
                    if (e.cache < 0 || static_cast<std::size_t>(e.cache) >= caches.size()) {
                        throw StructuralError("unknown cache in " + to_string(e));
                    }
                    reads.push_back(Read{sender, ReadKind::Lookup, e.cache});
                    break;
                case StagedExpr::Kind::PartialFold:
                    throw StructuralError("agent programs cannot fold; folds belong to aggregators");
            }
        }
    }
    readStart[n] = reads.size();
    for (const auto& c : caches) {
        for (std::size_t off = 0; off < c.schema.size(); ++off) {
            writeLists[static_cast<std::size_t>(c.schema[off].agent)].push_back(
                cacheBase[static_cast<std::size_t>(c.id)] + static_cast<std::int64_t>(off));
        }
    }
    routeStart.assign(n + 1, 0);
    writeStart.assign(n + 1, 0);
    for (std::size_t a = 0; a < n; ++a) {
        routeStart[a] = routes.size();
        routes.insert(routes.end(), routeLists[a].begin(), routeLists[a].end());
        writeStart[a] = writes.size();
        writes.insert(writes.end(), writeLists[a].begin(), writeLists[a].end());
    }
    routeStart[n] = routes.size();
    writeStart[n] = writes.size();

    for (const auto& plan : program.plans) {
        for (const auto& d : plan.aggregators) {
            Aggregator g;
            g.id = d.syntheticId;
            g.target = d.target;
            g.host = d.hostPartition;
            g.merged = plan.merged;
            g.contract = contract.at(static_cast<std::size_t>(d.target));
            for (const auto& s : d.senders) {
                if (partOf.at(static_cast<std::size_t>(s.agent)) != d.hostPartition) {
                    throw StructuralError("aggregator " + std::to_string(d.syntheticId) + " folds non-local x" +
                                          std::to_string(s.agent));
                }
                g.senders.push_back(s.agent);
            }
            aggregators.push_back(std::move(g));
        }
    }
}

const std::optional<Value>& Executor::Impl::read_slot(const Read& r, int bank, AgentId reader) const {
    switch (r.kind) {
        case ReadKind::Local: return outbox[bank][static_cast<std::size_t>(r.sender)];
        case ReadKind::Cache: return slots[bank][static_cast<std::size_t>(r.slot)];
        case ReadKind::Lookup: {
            const auto& c = caches[static_cast<std::size_t>(r.cache)];
            const auto off = c.offset_of(StateRef{r.sender, std::nullopt});
            if (!off) {
                throw StructuralError("x" + std::to_string(reader) + " looks up x" + std::to_string(r.sender) +
                                      " in cache " + std::to_string(r.cache) + ", which does not hold it");
            }
            return slots[bank][static_cast<std::size_t>(cacheBase[static_cast<std::size_t>(r.cache)] + *off)];
        }
    }
    throw StructuralError("bad read");
}

void Executor::Impl::compute(AgentId a, std::int64_t superstep, int cur, int worker) {
    const auto ai = static_cast<std::size_t>(a);
    const ComputeMethodContract& c = *contract[ai];
    auto& in = scratch[static_cast<std::size_t>(worker)];
    auto& cnt = counters[static_cast<std::size_t>(worker)];
    in.clear();

    const Read* r = reads.data() + readStart[ai];
    const Read* rEnd = reads.data() + readStart[ai + 1];
    InMessage* m = nullptr;
    InMessage* mEnd = nullptr;
    if (usesMailbox[ai]) {
        auto& box = inbox[static_cast<std::size_t>(partOf[ai])];
        m = box.msgs.data() + box.start[localIndex[ai]];
        mEnd = box.msgs.data() + box.start[localIndex[ai] + 1];
        cnt.consumed += static_cast<std::uint64_t>(mEnd - m);
    }
    // Both streams are ordered by sender; merging them fixes the fold order.
    while (r != rEnd || m != mEnd) {
        if (m == mEnd || (r != rEnd && r->sender < m->sender)) {
            const auto& v = read_slot(*r, cur, a);
            if (v) {
                in.push_back(c.deserialize ? c.deserialize(*v) : *v);
                if (tag_of(in.back()) != c.inMessageType) {
                    throw ContractError("message from x" + std::to_string(r->sender) + " to x" + std::to_string(a) +
                                        " is " + tag_name(tag_of(in.back())) + ", contract " + c.id + " expects " +
                                        tag_name(c.inMessageType));
                }
            }
            ++r;
        } else {
            in.push_back(std::move(m->payload));
            ++m;
        }
    }
    if (a == watch) cnt.target += in.size();

    Value next = c.updateState(AgentContext{a, superstep, seed}, values[cur][ai], c.partialCompute(in));
    if (tag_of(next) != c.valueType) {
        throw ContractError("contract " + c.id + " produced a " + tag_name(tag_of(next)) + " state for x" +
                            std::to_string(a));
    }
    values[1 - cur][ai] = std::move(next);
    publish(a, 1 - cur, worker);
}

void Executor::Impl::publish(AgentId a, int bank, int worker) {
    const auto ai = static_cast<std::size_t>(a);
    const ComputeMethodContract& c = *contract[ai];
    auto& cnt = counters[static_cast<std::size_t>(worker)];
    auto& out = outbox[bank][ai];
    out = c.stateToMessage(values[bank][ai]);
    if (out && tag_of(*out) != c.outMessageType) {
        throw ContractError("contract " + c.id + " sent a " + tag_name(tag_of(*out)) + " message from x" +
                            std::to_string(a));
    }
    for (std::size_t w = writeStart[ai]; w < writeStart[ai + 1]; ++w) slots[bank][static_cast<std::size_t>(writes[w])] = out;
    if (!out) return;
    cnt.logical += readerCount[ai];
    const PartitionId home = partOf[ai];
    auto& mine = shards[static_cast<std::size_t>(worker)];
    for (std::size_t k = routeStart[ai]; k < routeStart[ai + 1]; ++k) {
        const AgentId receiver = routes[k];
        const PartitionId dest = partOf[static_cast<std::size_t>(receiver)];
        mine[static_cast<std::size_t>(dest)].push_back(Envelope{receiver, a, *out});
        ++cnt.sent;
        if (dest != home) {
            ++cnt.wire;
            cnt.wireBytes += kEnvelopeHeaderBytes + payload_bytes(*out) + (mergedSender[ai] ? kPartitionHeaderBytes : 0);
        }
    }
}

void Executor::Impl::aggregate(const Aggregator& g, int bank, int worker) {
    auto& in = scratch[static_cast<std::size_t>(worker)];
    auto& cnt = counters[static_cast<std::size_t>(worker)];
    in.clear();
    for (AgentId s : g.senders) {
        const auto& v = outbox[bank][static_cast<std::size_t>(s)];
        if (v) in.push_back(deserialize(*g.contract, *v));
    }
    auto folded = g.contract->partialCompute(in);
    if (!folded) return;
    const PartitionId dest = partOf[static_cast<std::size_t>(g.target)];
    const std::uint64_t bytes = payload_bytes(*folded);
    shards[static_cast<std::size_t>(worker)][static_cast<std::size_t>(dest)].push_back(
        Envelope{g.target, g.id, std::move(*folded)});
    ++cnt.sent;
    if (dest != g.host) {
        ++cnt.wire;
        cnt.wireBytes += kEnvelopeHeaderBytes + bytes + (g.merged ? kPartitionHeaderBytes : 0);
    }
}

void Executor::Impl::deliver_partition(std::size_t p) {
    auto& box = inbox[p];
    const auto& members = memberList[p];
    box.start.assign(members.size() + 1, 0);
    std::size_t total = 0;
    for (auto& perWorker : shards) {
        for (const auto& e : perWorker[p]) ++box.start[localIndex[static_cast<std::size_t>(e.receiver)] + 1];
        total += perWorker[p].size();
    }
    for (std::size_t i = 0; i < members.size(); ++i) box.start[i + 1] += box.start[i];
    box.msgs.resize(total);
    if (total == 0) return;
    std::vector<std::size_t> fill(box.start.begin(), box.start.end() - 1);
    for (auto& perWorker : shards) {
        for (auto& e : perWorker[p]) {
            auto& slot = box.msgs[fill[localIndex[static_cast<std::size_t>(e.receiver)]]++];
            slot.sender = e.sender;
            slot.payload = std::move(e.payload);
        }
        perWorker[p].clear();
    }
    for (std::size_t li = 0; li < members.size(); ++li) {
        if (box.start[li + 1] == box.start[li]) continue;
        const AgentId receiver = members[li];
        finish_delivery(*contract[static_cast<std::size_t>(receiver)], receiver, box.msgs.data() + box.start[li],
                        box.msgs.data() + box.start[li + 1]);
    }
}

Counters Executor::Impl::phase(std::int64_t superstep, int cur, bool priming) {
    for (auto& c : counters) c = Counters{};
    // Priming publishes the initial state into the current bank; a superstep
    // reads the current bank and publishes into the other one.
    const int published = priming ? cur : 1 - cur;
    pool.parallel_for(unitStart.size() - 1, [&](std::size_t u, int worker) {
        for (std::size_t i = unitStart[u]; i < unitStart[u + 1]; ++i) {
            if (priming) {
                publish(unitOrder[i], cur, worker);
            } else {
                compute(unitOrder[i], superstep, cur, worker);
            }
        }
    });
    if (!aggregators.empty()) {
        pool.parallel_for(aggregators.size(),
                          [&](std::size_t g, int worker) { aggregate(aggregators[g], published, worker); });
    }
    pool.parallel_for(partitions, [&](std::size_t p, int) { deliver_partition(p); });

    Counters sum;
    for (const auto& c : counters) {
        sum.logical += c.logical;
        sum.wire += c.wire;
        sum.wireBytes += c.wireBytes;
        sum.target += c.target;
        sum.sent += c.sent;
        sum.consumed += c.consumed;
    }
    // Every cache crosses once per superstep, whatever its slots hold.
    for (const auto& c : caches) {
        if (c.schema.empty()) continue;
        ++sum.wire;
        std::uint64_t bytes = kCacheHeaderBytes;
        const auto base = static_cast<std::size_t>(cacheBase[static_cast<std::size_t>(c.id)]);
        for (std::size_t k = 0; k < c.schema.size(); ++k) {
            const auto& v = slots[published][base + k];
            bytes += 1 + (v ? payload_bytes(*v) : 0);
        }
        sum.wireBytes += bytes;
    }
    return sum;
}

ExecutionResult Executor::Impl::run(std::int64_t rounds, std::uint64_t runSeed) {
    if (rounds < 0) throw ParameterError("rounds must be non-negative");
    seed = runSeed;
    const auto workers = static_cast<std::size_t>(pool.size());
    values[0] = sim.initial;
    values[1].assign(n, Value{});
    for (int b = 0; b < 2; ++b) {
        outbox[b].assign(n, std::nullopt);
        slots[b].assign(slotCount, std::nullopt);
    }
    inbox.assign(partitions, Inbox{});
    shards.assign(workers, std::vector<std::vector<Envelope>>(partitions));
    counters.assign(workers, Counters{});
    scratch.assign(workers, {});

    ExecutionResult result;
    Metrics& mt = result.metrics;
    mt.optimizerMs = passMs;
    int cur = 0;
    mt.primingSent = phase(0, cur, true).sent;
    using Clock = std::chrono::steady_clock;
    for (std::int64_t t = 0; t < rounds; ++t) {
        const auto t0 = Clock::now();
        const Counters c = phase(t, cur, false);
        mt.roundMs.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
        mt.logical.push_back(c.logical);
        mt.wire.push_back(c.wire);
        mt.wireBytes.push_back(c.wireBytes);
        mt.targetInbound.push_back(c.target);
        mt.mailboxSent.push_back(c.sent);
        mt.mailboxConsumed.push_back(c.consumed);
        cur = 1 - cur;
    }

    SimulationState& st = result.state;
    st.superstep = rounds;
    st.values = values[cur];
    if (anyDoubleBuffered) st.previousValues = rounds > 0 ? values[1 - cur] : values[cur];
    st.messages = outbox[cur];
    return result;
}

Executor::Executor(const OptimizedProgram& program, const Simulation& sim, int threads)
    : impl_(std::make_unique<Impl>(program, sim, threads)) {}

Executor::~Executor() = default;

ExecutionResult Executor::run(std::int64_t rounds, std::uint64_t seed) { return impl_->run(rounds, seed); }

ExecutionResult execute(const OptimizedProgram& program, const Simulation& sim, std::int64_t rounds, int threads,
                        std::uint64_t seed) {
    Executor ex(program, sim, threads);
    return ex.run(rounds, seed);
}

} // namespace fuseforge
