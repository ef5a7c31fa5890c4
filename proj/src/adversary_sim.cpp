#include "por/adversary_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <json.hpp>

#include "por/error.hpp"

namespace por {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const char* placement_name(Placement p) {
    switch (p) {
        case Placement::uniform: return "uniform";
        case Placement::targeted: return "targeted";
        case Placement::per_stripe: return "per-stripe";
    }
    return "?";
}

std::string fraction_name(const char* verb, double delta, Placement p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s(%g%s%s)", verb, delta, p == Placement::uniform ? "" : ",",
                  p == Placement::uniform ? "" : placement_name(p));
    return buf;
}

/// First `count` entries of a uniformly shuffled [first, first + size).
std::vector<std::uint64_t> sample_range(std::uint64_t first, std::uint64_t size, std::uint64_t count, Rng& rng) {
    std::vector<std::uint64_t> all(size);
    for (std::uint64_t k = 0; k < size; ++k) all[k] = first + k;
    for (std::uint64_t k = 0; k < count; ++k) std::swap(all[k], all[k + rng.uniform(size - k)]);
    all.resize(count);
    return all;
}

class ReplayProver : public Prover {
public:
    ReplayProver(std::unique_ptr<Prover> inner, std::size_t window) : inner_(std::move(inner)), window_(window) {}

    Proof prove(const Challenge& ch) override {
        if (proofs_.size() < window_) return proofs_.emplace_back(inner_->prove(ch));
        return proofs_[next_proof_++ % window_];
    }
    std::vector<BlockWithTag> fetch(std::span<const std::uint64_t> indices) override {
        if (fetches_.size() < window_) return fetches_.emplace_back(inner_->fetch(indices));
        return fetches_[next_fetch_++ % window_];
    }

private:
    std::unique_ptr<Prover> inner_;
    std::size_t window_;
    std::vector<Proof> proofs_;
    std::vector<std::vector<BlockWithTag>> fetches_;
    std::size_t next_proof_ = 0;
    std::size_t next_fetch_ = 0;
};

class ForwardingDynStore : public DynStore {
public:
    explicit ForwardingDynStore(DynStore& inner) : inner_(inner) {}
    std::vector<std::optional<DynSymbol>> fetch(DynRegion region, std::size_t level,
                                                std::span<const std::uint64_t> positions) override {
        return inner_.fetch(region, level, positions);
    }
    std::vector<Bytes> fetch_all(DynRegion region, std::size_t level) override {
        return inner_.fetch_all(region, level);
    }
    DynSymbol write_u(std::uint64_t i, const Bytes& leaf) override { return inner_.write_u(i, leaf); }
    void put_level(std::size_t level, const std::vector<Bytes>& symbols) override {
        inner_.put_level(level, symbols);
    }
    void put_c(const std::vector<Bytes>& symbols) override { inner_.put_c(symbols); }

protected:
    DynStore& inner_;
};

class ReplayDynStore : public ForwardingDynStore {
public:
    ReplayDynStore(DynStore& inner, std::size_t window) : ForwardingDynStore(inner), window_(window) {}
    std::vector<std::optional<DynSymbol>> fetch(DynRegion region, std::size_t level,
                                                std::span<const std::uint64_t> positions) override {
        if (replies_.size() < window_) return replies_.emplace_back(inner_.fetch(region, level, positions));
        return replies_[next_++ % window_];
    }

private:
    std::size_t window_;
    std::vector<std::vector<std::optional<DynSymbol>>> replies_;
    std::size_t next_ = 0;
};

void damage_leaves(std::vector<Bytes>& leaves, const FieldPtr& field, double delta, Placement placement,
                   std::uint64_t stripe, bool corrupt, Rng& rng) {
    for (auto p : damage_sites(leaves.size(), delta, placement, stripe, rng)) {
        auto& leaf = leaves[p];
        if (!corrupt) {
            leaf.clear();
            continue;
        }
        const auto width = field->byte_width();
        ByteWriter w;
        for (std::size_t k = 0; k < leaf.size() / width; ++k) FieldElement::random(field, rng).write(w);
        leaf = std::move(w).take();
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Random file filling `setup.blocks` encoded blocks.
Bytes trial_file(const FieldPtr& field, const TrialSetup& setup, Rng& rng) {
    const auto data_blocks = std::max<std::uint64_t>(1, setup.blocks * setup.code.f / setup.code.n);
    Bytes file(data_blocks * field->payload_bytes());
    rng.fill(file);
    return file;
}

}  // namespace

std::string behavior_name(const ServerBehavior& b) {
    return std::visit(overloaded{
                          [](const Honest&) { return std::string("honest"); },
                          [](const EraseFraction& e) { return fraction_name("erase", e.delta, e.placement); },
                          [](const CorruptFraction& c) { return fraction_name("corrupt", c.delta, c.placement); },
                          [](const Replay& r) { return "replay(" + std::to_string(r.window) + ")"; },
                      },
                      b);
}

void validate(const ServerBehavior& b) {
    auto check_delta = [](double d) {
        if (!(d >= 0 && d <= 1)) throw UsageError("damage fraction must lie in [0, 1]");
    };
    std::visit(overloaded{
                   [](const Honest&) {},
                   [&](const EraseFraction& e) { check_delta(e.delta); },
                   [&](const CorruptFraction& c) { check_delta(c.delta); },
                   [](const Replay& r) {
                       if (r.window == 0) throw UsageError("replay window must be positive");
                   },
               },
               b);
}

std::vector<std::uint64_t> damage_sites(std::uint64_t size, double delta, Placement placement, std::uint64_t stripe,
                                        Rng& rng) {
    if (!(delta >= 0 && delta <= 1)) throw UsageError("damage fraction must lie in [0, 1]");
    if (stripe == 0 || placement == Placement::uniform) {
        return sample_range(0, size, static_cast<std::uint64_t>(std::floor(delta * double(size))), rng);
    }
    const std::uint64_t stripes = (size + stripe - 1) / stripe;
    auto span_of = [&](std::uint64_t s) { return std::min(stripe, size - s * stripe); };
    std::vector<std::uint64_t> out;
    if (placement == Placement::per_stripe) {
        const auto each = static_cast<std::uint64_t>(std::floor(delta * double(stripe)));
        for (std::uint64_t s = 0; s < stripes; ++s) {
            auto part = sample_range(s * stripe, span_of(s), std::min(each, span_of(s)), rng);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    auto budget = static_cast<std::uint64_t>(std::floor(delta * double(size)));
    for (auto s : sample_range(0, stripes, stripes, rng)) {
        if (budget == 0) break;
        const auto take = std::min(budget, span_of(s));
        auto part = sample_range(s * stripe, span_of(s), take, rng);
        out.insert(out.end(), part.begin(), part.end());
        budget -= take;
    }
    return out;
}

void erase_blocks(TaggedFile& store, std::span<const std::uint64_t> indices) {
    const auto width = store.tag_width();
    for (auto i : indices) {
        if (i == 0 || i > store.size()) throw UsageError("block index out of range");
        store.container.elements[i - 1] = FieldElement::zero(store.field());
        std::visit(overloaded{
                       [&](std::vector<Bytes>& v) {
                           if (i <= v.size()) v[i - 1] = Bytes(width, 0);
                       },
                       [&](std::vector<FieldElement>& v) { v.at(i - 1) = FieldElement::zero(store.field()); },
                       [&](std::vector<GroupElement>& v) { v.at(i - 1) = store.group->identity(); },
                   },
                   store.tags);
    }
}

void corrupt_blocks(TaggedFile& store, std::span<const std::uint64_t> indices, Rng& rng) {
    for (auto i : indices) {
        if (i == 0 || i > store.size()) throw UsageError("block index out of range");
        store.container.elements[i - 1] = FieldElement::random(store.field(), rng);
    }
}

std::unique_ptr<Prover> apply_behavior(const TaggedFile& store, const ServerBehavior& b, Rng& rng) {
    validate(b);
    auto copy = std::make_shared<TaggedFile>(store);
    auto to_indices = [](std::vector<std::uint64_t> sites) {
        for (auto& s : sites) ++s;
        return sites;
    };
    const std::uint64_t stripe = store.container.header.n;
    std::visit(overloaded{
                   [](const Honest&) {},
                   [&](const EraseFraction& e) {
                       erase_blocks(*copy, to_indices(damage_sites(copy->size(), e.delta, e.placement, stripe, rng)));
                   },
                   [&](const CorruptFraction& c) {
                       corrupt_blocks(*copy, to_indices(damage_sites(copy->size(), c.delta, c.placement, stripe, rng)),
                                      rng);
                   },
                   [](const Replay&) {},
               },
               b);
    std::unique_ptr<Prover> prover = std::make_unique<StoreProver>(std::move(copy));
    if (const auto* r = std::get_if<Replay>(&b)) return std::make_unique<ReplayProver>(std::move(prover), r->window);
    return prover;
}

std::unique_ptr<DynStore> apply_behavior(DynServerState& state, const ServerBehavior& b, Rng& rng) {
    validate(b);
    auto damage = [&](double delta, Placement placement, bool corrupt) {
        const auto& field = state.field();
        damage_leaves(state.raw(DynRegion::c), field, delta, placement, state.params().c_code_or_default().n, corrupt,
                      rng);
        for (std::size_t l = 0; l < state.params().levels(); ++l) {
            if (state.level_full(l)) {
                damage_leaves(state.raw(DynRegion::h, l), field, delta, placement, std::uint64_t{2} << l, corrupt, rng);
            }
        }
        damage_leaves(state.raw(DynRegion::u), field, delta, placement, state.params().n, corrupt, rng);
    };
    std::visit(overloaded{
                   [](const Honest&) {},
                   [&](const EraseFraction& e) { damage(e.delta, e.placement, false); },
                   [&](const CorruptFraction& c) { damage(c.delta, c.placement, true); },
                   [](const Replay&) {},
               },
               b);
    if (const auto* r = std::get_if<Replay>(&b)) return std::make_unique<ReplayDynStore>(state, r->window);
    return std::make_unique<ForwardingDynStore>(state);
}

// ---------------------------------------------------------------------------

double ExperimentReport::standard_error() const {
    if (trials == 0) return 0;
    return std::sqrt(reference * (1 - reference) / static_cast<double>(trials));
}

bool ExperimentReport::within(double sigmas) const {
    return std::abs(rate() - reference) <= sigmas * standard_error() + 1e-12;
}

std::string ExperimentReport::json_line() const {
    nlohmann::json j = {{"kind", "detection"},
                        {"scheme", scheme},
                        {"behavior", behavior},
                        {"delta", delta},
                        {"l", l},
                        {"trials", trials},
                        {"detections", detections},
                        {"rate", rate()},
                        {"reference", reference},
                        {"stderr", standard_error()},
                        {"seconds", seconds}};
    return j.dump();
}

std::string ExtractionReport::json_line() const {
    nlohmann::json j = {{"kind", "extraction"}, {"scheme", scheme},       {"behavior", behavior},
                        {"n", code.n},          {"f", code.f},            {"trials", trials},
                        {"successes", successes}, {"seconds", seconds}};
    if (!first_failure.empty()) j["first_failure"] = first_failure;
    return j.dump();
}

bool is_experiment_scheme(std::string_view scheme) {
    if (scheme == "dynamic") return true;
    try {
        parse_scheme(scheme);
        return true;
    } catch (const UsageError&) {
        return false;
    }
}

namespace {

struct Damage {
    double delta = 0;
    bool any = false;
};

Damage damage_of(const ServerBehavior& b) {
    return std::visit(overloaded{
                          [](const Honest&) { return Damage{}; },
                          [](const EraseFraction& e) { return Damage{e.delta, true}; },
                          [](const CorruptFraction& c) { return Damage{c.delta, true}; },
                          [](const Replay&) { return Damage{}; },
                      },
                      b);
}

std::size_t warmup_audits(const ServerBehavior& b) {
    if (const auto* r = std::get_if<Replay>(&b)) return r->window;
    return 0;
}

/// One static trial: true when the final audit fails.
bool static_trial(Scheme scheme, const ServerBehavior& b, std::uint64_t l, const TrialSetup& setup,
                  const GroupPtr& group, Rng& rng) {
    const auto& field = group->scalars();
    auto keys = generate_keys(scheme, group, rng);
    const auto file = trial_file(field, setup, rng);
    if (scheme == Scheme::sentinel) {
        const auto& sk = std::get<SentinelKeys>(keys);
        const auto audits = 1 + warmup_audits(b);
        auto s = sentinel_setup(file, sk, field, setup.code, std::max(setup.sentinels, l * audits));
        auto prover = apply_behavior(s.store, b, rng);
        bool ok = true;
        for (std::size_t k = 0; k < audits; ++k) ok = sentinel_audit(s.ledger, sk, field, l, *prover);
        return !ok;
    }
    const auto store = por_setup(file, keys, group, setup.code);
    auto prover = apply_behavior(store, b, rng);
    const auto vk = verifier_key(keys);
    bool ok = true;
    for (std::size_t k = 0; k <= warmup_audits(b); ++k) {
        const auto ch = gen_challenge(field, store.file_id, store.size(), l, rng, !is_jk(scheme));
        ok = por_verify(vk, group, ch, prover->prove(ch)).ok;
    }
    return !ok;
}

bool dynamic_trial(const ServerBehavior& b, std::uint64_t l, const TrialSetup& setup, const FieldPtr& field,
                   Rng& rng) {
    Bytes file(setup.blocks * field->payload_bytes());
    rng.fill(file);
    auto [client, state] = DynClient::init(file, field, {setup.blocks, 1, {}});
    auto store = apply_behavior(state, b, rng);
    bool ok = true;
    for (std::size_t k = 0; k <= warmup_audits(b); ++k) ok = client.audit(*store, l, rng);
    return !ok;
}

}  // namespace

ExperimentReport detection_experiment(std::string_view scheme, const ServerBehavior& b, std::uint64_t l,
                                      std::uint64_t trials, Rng& rng, const TrialSetup& setup) {
    if (trials == 0) throw UsageError("trials must be at least 1");
    if (l == 0) throw UsageError("challenge size must be positive");
    if (!is_experiment_scheme(scheme)) throw UsageError("unknown scheme " + std::string(scheme));
    validate(b);
    const auto start = std::chrono::steady_clock::now();
    const bool dynamic = scheme == "dynamic";
    const auto field = PrimeField::default_field();
    const auto group = BilinearGroup::transparent(field);

    ExperimentReport report;
    report.scheme = std::string(scheme);
    report.behavior = behavior_name(b);
    report.l = l;
    report.trials = trials;
    const auto damage = damage_of(b);
    report.delta = damage.delta;
    if (std::holds_alternative<Replay>(b)) {
        report.reference = 1;
    } else if (damage.any) {
        // A fresh dynamic store is audited in C and U.
        const double samples = double(l) * (dynamic ? 2 : 1);
        report.reference = 1 - std::pow(1 - damage.delta, samples);
    }

    const auto seed = rng.next_u64();
    for (std::uint64_t t = 0; t < trials; ++t) {
        auto trial_rng = Rng::derive(seed, t);
        const bool detected = dynamic ? dynamic_trial(b, l, setup, field, trial_rng)
                                      : static_trial(parse_scheme(scheme), b, l, setup, group, trial_rng);
        report.detections += detected ? 1 : 0;
    }
    report.seconds = seconds_since(start);
    return report;
}

ExperimentReport detection_experiment(std::string_view scheme, double delta, std::uint64_t l, std::uint64_t trials,
                                      Rng& rng, const TrialSetup& setup) {
    return detection_experiment(scheme, EraseFraction{delta}, l, trials, rng, setup);
}

ExtractionReport extraction_experiment(std::string_view scheme, const ServerBehavior& b, std::size_t file_bytes,
                                       std::uint64_t trials, Rng& rng, const TrialSetup& setup) {
    if (trials == 0) throw UsageError("trials must be at least 1");
    if (file_bytes == 0) throw UsageError("file must not be empty");
    if (!is_experiment_scheme(scheme)) throw UsageError("unknown scheme " + std::string(scheme));
    validate(b);
    const auto start = std::chrono::steady_clock::now();
    const auto field = PrimeField::default_field();
    const auto group = BilinearGroup::transparent(field);
    const bool dynamic = scheme == "dynamic";

    ExtractionReport report;
    report.scheme = std::string(scheme);
    report.behavior = behavior_name(b);
    report.code = setup.code;
    report.trials = trials;
    ExtractionPolicy policy;
    policy.rho = double(setup.code.f) / double(setup.code.n);

    const auto seed = rng.next_u64();
    for (std::uint64_t t = 0; t < trials; ++t) {
        auto trial_rng = Rng::derive(seed, t);
        Bytes file(file_bytes);
        trial_rng.fill(file);
        std::string failure;
        if (dynamic) {
            const auto per_block = field->payload_bytes();
            const std::uint64_t n = (file_bytes + per_block - 1) / per_block;
            auto [client, state] = DynClient::init(file, field, {n, 1, setup.code});
            auto store = apply_behavior(state, b, trial_rng);
            auto r = client.extract(*store);
            if (!r.ok()) {
                failure = r.report();
            } else if (client.extract_bytes(*store) != file) {
                failure = "recovered bytes differ";
            }
        } else {
            const auto scheme_id = parse_scheme(scheme);
            auto keys = generate_keys(scheme_id, group, trial_rng);
            TaggedFile store;
            if (scheme_id == Scheme::sentinel) {
                store = sentinel_setup(file, std::get<SentinelKeys>(keys), field, setup.code, setup.sentinels).store;
            } else {
                store = por_setup(file, keys, group, setup.code);
            }
            auto prover = apply_behavior(store, b, trial_rng);
            auto manifest = store.manifest();
            auto r = extract(*prover, keys, group, manifest, policy, trial_rng);
            if (!r.ok()) {
                failure = r.report();
            } else if (*r.data != file) {
                failure = "recovered bytes differ";
            }
        }
        if (failure.empty()) {
            ++report.successes;
        } else if (report.first_failure.empty()) {
            report.first_failure = failure;
        }
    }
    report.seconds = seconds_since(start);
    return report;
}

std::string format_table(std::span<const ExperimentReport> reports) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-11s %-22s %6s %5s %7s %8s %8s %9s %7s %8s\n", "scheme", "behavior", "delta",
                  "l", "trials", "detected", "rate", "reference", "z", "seconds");
    out += line;
    for (const auto& r : reports) {
        const double se = r.standard_error();
        const double z = se > 0 ? (r.rate() - r.reference) / se : 0.0;
        std::snprintf(line, sizeof line, "%-11s %-22s %6.3f %5llu %7llu %8llu %8.4f %9.4f %7.2f %8.2f\n",
                      r.scheme.c_str(), r.behavior.c_str(), r.delta, static_cast<unsigned long long>(r.l),
                      static_cast<unsigned long long>(r.trials), static_cast<unsigned long long>(r.detections),
                      r.rate(), r.reference, z, r.seconds);
        out += line;
    }
    return out;
}

}  // namespace por
