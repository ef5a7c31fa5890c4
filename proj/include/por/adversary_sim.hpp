#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "por/por_dynamic.hpp"
#include "por/por_static.hpp"

namespace por {

/// Where damaged positions go.
enum class Placement : std::uint8_t {
    uniform = 0,     // floor(delta * size) positions uniformly without replacement
    targeted = 1,    // the same count packed into as few stripes as possible
    per_stripe = 2,  // floor(delta * n) uniformly chosen positions in every stripe
};

struct Honest {};
struct EraseFraction {
    double delta = 0;
    Placement placement = Placement::uniform;
};
struct CorruptFraction {
    double delta = 0;
    Placement placement = Placement::uniform;
};
/// Answers the first `window` requests honestly, then replays them in turn.
struct Replay {
    std::size_t window = 1;
};
using ServerBehavior = std::variant<Honest, EraseFraction, CorruptFraction, Replay>;

std::string behavior_name(const ServerBehavior& b);
/// Throws UsageError for delta outside [0, 1] or a zero replay window.
void validate(const ServerBehavior& b);

/// Damaged 0-based positions out of `size`; `stripe` is the codeword length
/// used by targeted and per-stripe placement.
std::vector<std::uint64_t> damage_sites(std::uint64_t size, double delta, Placement placement, std::uint64_t stripe,
                                        Rng& rng);

/// Blocks at 1-based `indices` become zero, their tags zero (identity for
/// group tags): a server that lost them and bluffs.
void erase_blocks(TaggedFile& store, std::span<const std::uint64_t> indices);
/// Blocks at 1-based `indices` get fresh random values; tags are kept.
void corrupt_blocks(TaggedFile& store, std::span<const std::uint64_t> indices, Rng& rng);

/// Prover over a damaged copy of `store`.
std::unique_ptr<Prover> apply_behavior(const TaggedFile& store, const ServerBehavior& b, Rng& rng);
/// Damages every region of `state` in place (C, each full H level, U) and
/// returns the store the client should talk to.
std::unique_ptr<DynStore> apply_behavior(DynServerState& state, const ServerBehavior& b, Rng& rng);

// ---------------------------------------------------------------------------
// Experiments

/// Shape of each fresh store built by an experiment trial.
struct TrialSetup {
    std::uint64_t blocks = 1024;  // encoded blocks (static) or n (dynamic)
    CodeParams code{16, 8};
    std::uint64_t sentinels = 100;
};

struct ExperimentReport {
    std::string scheme;
    std::string behavior;
    double delta = 0;
    std::uint64_t l = 0;
    std::uint64_t trials = 0;
    std::uint64_t detections = 0;
    double reference = 0;  // closed-form detection probability
    double seconds = 0;

    double rate() const { return trials == 0 ? 0 : static_cast<double>(detections) / static_cast<double>(trials); }
    /// Standard error of the empirical rate under the reference.
    double standard_error() const;
    bool within(double sigmas) const;
    std::string json_line() const;
};

/// Schemes accepted by the experiments: the static scheme names plus "dynamic".
bool is_experiment_scheme(std::string_view scheme);

/// `trials` independent setup, damage, challenge and verify cycles. Sentinel
/// trials spend `l` sentinels; dynamic trials sample `l` symbols per region.
ExperimentReport detection_experiment(std::string_view scheme, const ServerBehavior& b, std::uint64_t l,
                                      std::uint64_t trials, Rng& rng, const TrialSetup& setup = {});
ExperimentReport detection_experiment(std::string_view scheme, double delta, std::uint64_t l, std::uint64_t trials,
                                      Rng& rng, const TrialSetup& setup = {});

struct ExtractionReport {
    std::string scheme;
    std::string behavior;
    CodeParams code;
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    std::string first_failure;  // extraction report of the first failed trial
    double seconds = 0;

    std::string json_line() const;
};

/// Random file of `file_bytes`, setup, damage, full extraction, byte compare.
ExtractionReport extraction_experiment(std::string_view scheme, const ServerBehavior& b, std::size_t file_bytes,
                                       std::uint64_t trials, Rng& rng, const TrialSetup& setup = {});

/// Human-readable table, one row per report.
std::string format_table(std::span<const ExperimentReport> reports);

}  // namespace por
