#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "byzsgd/grad.hpp"

namespace byzsgd {

enum class AttackKind { NoAttack, Gaussian, Omniscient, BitFlip, Gambler };

const char* to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& name);
std::vector<AttackKind> all_attack_kinds();

/// Which workers are Byzantine for the worker-level (Eq. 1 style) attacks.
enum class ByzantineSelection { FixedSet, ResampledPerRound };

struct AttackSpec {
    AttackKind kind = AttackKind::NoAttack;
    ByzantineSelection selection = ByzantineSelection::FixedSet;

    // Gaussian / Omniscient (worker-level replacement)
    int q = 0;
    double sigma = 200.0;  // Gaussian std per component
    double scale = 1e20;   // Omniscient magnitude

    // BitFlip (one corrupted value per attacked column)
    int num_dims = 0;                             // 0 means min(1000, d)
    std::vector<int> bit_positions = {22, 30, 31, 32};  // 1-based from LSB
    bool bitflip_same_worker = false;             // classic-placement variant

    // Gambler (per-value corruption inside one server's partition)
    int num_servers = 1;
    int target_server = 0;
    double prob = 0.0005;
    double factor = -1e20;
};

/// Randomness scope for one application of an attack. The derived stream is
/// a pure function of (seed, round), so runs replay exactly.
struct AttackContext {
    std::uint64_t seed = 0;
    std::uint64_t round = 0;
};

/// Applies `spec` to the correct matrix `m` and returns the corrupted copy.
GradMatrix apply_attack(const AttackSpec& spec, const AttackContext& ctx, const GradMatrix& m);

/// The Byzantine worker set an Eq.-1 attack would corrupt this round.
std::vector<std::size_t> byzantine_workers(const AttackSpec& spec, const AttackContext& ctx,
                                           std::size_t n);

/// XORs the bits at the given 1-based LSB positions; {22,30,31,32} -> mask 0xE0200000.
WireValue bitflip32(WireValue w, const std::vector<int>& bit_positions);
std::uint32_t bitflip_mask(const std::vector<int>& bit_positions);

/// Contiguous near-even split of [0, d) across servers; earlier servers get
/// the larger parts. Returns half-open [begin, end) ranges.
std::vector<std::pair<std::size_t, std::size_t>> partition_dims(std::size_t d, int num_servers);

/// Diagonal corruption defeating any row-selecting rule: entry (i, i) becomes
/// -1e20 * sign(g[i]) * max(|g[i]|, 1). Requires n <= d.
GradMatrix dimensional_worst_case(const GradMatrix& m, const GradVector& g_estimate);

}  // namespace byzsgd
