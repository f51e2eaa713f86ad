#include "byzsgd/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "byzsgd/rng.hpp"

namespace byzsgd {

namespace {
// stream tags so the per-attack draws never alias
constexpr std::uint64_t kTagSelection = 0xB5E1;
constexpr std::uint64_t kTagPayload = 0xA77A;
}  // namespace

const char* to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::NoAttack: return "none";
        case AttackKind::Gaussian: return "gaussian";
        case AttackKind::Omniscient: return "omniscient";
        case AttackKind::BitFlip: return "bitflip";
        case AttackKind::Gambler: return "gambler";
    }
    return "?";
}

std::vector<AttackKind> all_attack_kinds() {
    return {AttackKind::NoAttack, AttackKind::Gaussian, AttackKind::Omniscient,
            AttackKind::BitFlip, AttackKind::Gambler};
}

AttackKind attack_kind_from_string(const std::string& name) {
    for (AttackKind k : all_attack_kinds())
        if (name == to_string(k)) return k;
    std::string valid;
    for (AttackKind k : all_attack_kinds()) {
        if (!valid.empty()) valid += ", ";
        valid += to_string(k);
    }
    throw ParameterError("attack: unknown kind \"" + name + "\" (valid kinds: " + valid + ")");
}

std::vector<std::size_t> byzantine_workers(const AttackSpec& spec, const AttackContext& ctx,
                                           std::size_t n) {
    require_param(spec.q >= 0 && static_cast<std::size_t>(spec.q) <= n,
                  "attack: need 0 <= q <= n");
    const std::size_t q = static_cast<std::size_t>(spec.q);
    if (spec.selection == ByzantineSelection::FixedSet) {
        std::vector<std::size_t> byz(q);
        std::iota(byz.begin(), byz.end(), std::size_t{0});
        return byz;
    }
    // partial Fisher-Yates draw of q distinct workers
    Rng rng = Rng::stream(ctx.seed, ctx.round, kTagSelection);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < q; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> byz(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(q));
    std::sort(byz.begin(), byz.end());
    return byz;
}

std::uint32_t bitflip_mask(const std::vector<int>& bit_positions) {
    std::uint32_t mask = 0;
    for (int p : bit_positions) {
        require_param(p >= 1 && p <= 32, "bitflip: positions must be in 1..32");
        mask |= 1u << (p - 1);
    }
    return mask;
}

WireValue bitflip32(WireValue w, const std::vector<int>& bit_positions) {
    return WireValue{w.bits ^ bitflip_mask(bit_positions)};
}

std::vector<std::pair<std::size_t, std::size_t>> partition_dims(std::size_t d, int num_servers) {
    require_param(num_servers >= 1, "partition_dims: need at least one server");
    const std::size_t s = static_cast<std::size_t>(num_servers);
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    ranges.reserve(s);
    const std::size_t base = d / s;
    const std::size_t extra = d % s;  // first `extra` servers get one more
    std::size_t begin = 0;
    for (std::size_t i = 0; i < s; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        ranges.emplace_back(begin, begin + len);
        begin += len;
    }
    return ranges;
}

GradMatrix dimensional_worst_case(const GradMatrix& m, const GradVector& g_estimate) {
    require_param(m.n() <= m.d(), "dimensional_worst_case: requires n <= d");
    require(g_estimate.size() == m.d(), "dimensional_worst_case: g_estimate length mismatch");
    GradMatrix out = m;
    for (std::size_t i = 0; i < m.n(); ++i) {
        const double g = g_estimate[i];
        const double sign = g < 0.0 ? -1.0 : 1.0;
        out(i, i) = -1e20 * sign * std::max(std::abs(g), 1.0);
    }
    return out;
}

namespace {

GradMatrix apply_gaussian(const AttackSpec& spec, const AttackContext& ctx, const GradMatrix& m) {
    GradMatrix out = m;
    Rng rng = Rng::stream(ctx.seed, ctx.round, kTagPayload);
    for (std::size_t i : byzantine_workers(spec, ctx, m.n()))
        for (std::size_t j = 0; j < m.d(); ++j) out(i, j) = rng.normal(0.0, spec.sigma);
    return out;
}

GradMatrix apply_omniscient(const AttackSpec& spec, const AttackContext& ctx,
                            const GradMatrix& m) {
    const std::vector<std::size_t> byz = byzantine_workers(spec, ctx, m.n());
    std::vector<bool> is_byz(m.n(), false);
    for (std::size_t i : byz) is_byz[i] = true;

    GradVector payload(m.d(), 0.0);
    for (std::size_t i = 0; i < m.n(); ++i) {
        if (is_byz[i]) continue;
        const auto row = m.row(i);
        for (std::size_t j = 0; j < m.d(); ++j) payload[j] += row[j];
    }
    for (double& v : payload) v *= -spec.scale;

    GradMatrix out = m;
    for (std::size_t i : byz)
        for (std::size_t j = 0; j < m.d(); ++j) out(i, j) = payload[j];
    return out;
}

GradMatrix apply_bitflip(const AttackSpec& spec, const GradMatrix& m) {
    const std::size_t attacked =
        spec.num_dims > 0 ? static_cast<std::size_t>(spec.num_dims)
                          : std::min<std::size_t>(1000, m.d());
    require_param(attacked <= m.d(), "bitflip: num_dims exceeds d");
    const std::uint32_t mask = bitflip_mask(spec.bit_positions);

    GradMatrix out = m;
    for (std::size_t j = 0; j < attacked; ++j) {
        const std::size_t victim = spec.bitflip_same_worker ? 0 : j % m.n();
        const WireValue w = to_wire(out(victim, j));
        out(victim, j) = from_wire(WireValue{w.bits ^ mask});
    }
    return out;
}

GradMatrix apply_gambler(const AttackSpec& spec, const AttackContext& ctx, const GradMatrix& m) {
    require_param(spec.target_server >= 0 && spec.target_server < spec.num_servers,
                  "gambler: need 0 <= target_server < num_servers");
    require_param(spec.prob >= 0.0 && spec.prob <= 1.0, "gambler: need 0 <= prob <= 1");
    const auto ranges = partition_dims(m.d(), spec.num_servers);
    const auto [begin, end] = ranges[static_cast<std::size_t>(spec.target_server)];

    GradMatrix out = m;
    Rng rng = Rng::stream(ctx.seed, ctx.round, kTagPayload);
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = begin; j < end; ++j)
            if (rng.uniform() < spec.prob) out(i, j) *= spec.factor;
    return out;
}

}  // namespace

GradMatrix apply_attack(const AttackSpec& spec, const AttackContext& ctx, const GradMatrix& m) {
    switch (spec.kind) {
        case AttackKind::NoAttack: return m;
        case AttackKind::Gaussian: return apply_gaussian(spec, ctx, m);
        case AttackKind::Omniscient: return apply_omniscient(spec, ctx, m);
        case AttackKind::BitFlip: return apply_bitflip(spec, m);
        case AttackKind::Gambler: return apply_gambler(spec, ctx, m);
    }
    throw ParameterError("apply_attack: unknown attack kind");
}

}  // namespace byzsgd
