#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "byzsgd/attacks.hpp"
#include "byzsgd/rng.hpp"

using namespace byzsgd;

namespace {

GradMatrix random_matrix(Rng& rng, std::size_t n, std::size_t d) {
    std::vector<GradVector> rows(n, GradVector(d));
    for (auto& r : rows)
        for (double& x : r) x = rng.normal();
    return GradMatrix::from_rows(rows);
}

std::size_t count_differing_columns_in_row(const GradMatrix& a, const GradMatrix& b,
                                           std::size_t i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < a.d(); ++j)
        if (a(i, j) != b(i, j)) ++c;
    return c;
}

}  // namespace

TEST_CASE("no-attack identity") {
    Rng rng(1);
    const GradMatrix m = random_matrix(rng, 5, 3);
    AttackSpec spec;
    CHECK(apply_attack(spec, {42, 7}, m) == m);
}

TEST_CASE("omniscient example") {
    AttackSpec spec;
    spec.kind = AttackKind::Omniscient;
    spec.q = 1;
    spec.scale = 2.0;
    // fixed set corrupts worker 0; put the correct rows at indices 1, 2
    const GradMatrix m = GradMatrix::from_rows({{99}, {1}, {3}});
    const GradMatrix out = apply_attack(spec, {0, 0}, m);
    CHECK(out(0, 0) == -8.0);
    CHECK(out(1, 0) == 1.0);
    CHECK(out(2, 0) == 3.0);
}

TEST_CASE("omniscient rows are identical") {
    Rng rng(8);
    const GradMatrix m = random_matrix(rng, 9, 4);
    AttackSpec spec;
    spec.kind = AttackKind::Omniscient;
    spec.q = 3;
    const GradMatrix out = apply_attack(spec, {5, 2}, m);
    CHECK(out.row_copy(0) == out.row_copy(1));
    CHECK(out.row_copy(1) == out.row_copy(2));
    for (std::size_t i = 3; i < 9; ++i) CHECK(out.row_copy(i) == m.row_copy(i));
}

TEST_CASE("gambler example: prob 1 hits only the target partition") {
    AttackSpec spec;
    spec.kind = AttackKind::Gambler;
    spec.num_servers = 2;
    spec.target_server = 0;
    spec.prob = 1.0;
    spec.factor = -1e20;
    const GradMatrix m = GradMatrix::from_rows({{2.0, 1.0, 5.0, 6.0}});
    const GradMatrix out = apply_attack(spec, {3, 1}, m);
    CHECK(out(0, 0) == -2.0e20);
    CHECK(out(0, 1) == -1.0e20);
    CHECK(out(0, 2) == 5.0);
    CHECK(out(0, 3) == 6.0);
}

TEST_CASE("bitflip mask and involution") {
    CHECK(bitflip_mask({22, 30, 31, 32}) == 0xE0200000u);
    CHECK(bitflip32(WireValue{0x3F800000u}, {22, 30, 31, 32}).bits == 0xDFA00000u);
    CHECK(from_wire(WireValue{0xDFA00000u}) == doctest::Approx(-2.3058430092136940e19));
    CHECK(bitflip32(WireValue{0x12345678u}, {}).bits == 0x12345678u);
    const WireValue w{0xCAFEBABEu};
    CHECK(bitflip32(bitflip32(w, {22, 30, 31, 32}), {22, 30, 31, 32}).bits == w.bits);
    CHECK_THROWS_AS(bitflip_mask({0}), ParameterError);
    CHECK_THROWS_AS(bitflip_mask({33}), ParameterError);
}

TEST_CASE("bitflip placement: one corrupted value per affected column, victim j mod n") {
    Rng rng(17);
    const std::size_t n = 5, d = 12;
    const GradMatrix m = random_matrix(rng, n, d);
    AttackSpec spec;
    spec.kind = AttackKind::BitFlip;
    spec.num_dims = 7;
    const GradMatrix out = apply_attack(spec, {1, 1}, m);
    for (std::size_t j = 0; j < d; ++j) {
        std::size_t corrupted = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (out(i, j) != m(i, j)) {
                ++corrupted;
                CHECK(i == j % n);
                const double expect = from_wire(
                    bitflip32(to_wire(m(i, j)), spec.bit_positions));
                CHECK(out(i, j) == expect);
            }
        CHECK(corrupted == (j < 7 ? 1u : 0u));
    }
}

TEST_CASE("bitflip same-worker variant corrupts a single row") {
    Rng rng(18);
    const GradMatrix m = random_matrix(rng, 4, 10);
    AttackSpec spec;
    spec.kind = AttackKind::BitFlip;
    spec.bitflip_same_worker = true;
    const GradMatrix out = apply_attack(spec, {1, 1}, m);
    std::size_t rows_touched = 0;
    for (std::size_t i = 0; i < 4; ++i)
        if (count_differing_columns_in_row(m, out, i) > 0) ++rows_touched;
    CHECK(rows_touched == 1);
}

TEST_CASE("partition_dims examples") {
    using Ranges = std::vector<std::pair<std::size_t, std::size_t>>;
    CHECK(partition_dims(10, 2) == Ranges{{0, 5}, {5, 10}});
    CHECK(partition_dims(7, 3) == Ranges{{0, 3}, {3, 5}, {5, 7}});
    CHECK(partition_dims(4, 4) == Ranges{{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    CHECK_THROWS_AS(partition_dims(4, 0), ParameterError);
}

TEST_CASE("partition_dims covers [0,d) with balanced sizes") {
    for (std::size_t d : {1u, 5u, 97u, 1000u})
        for (int s : {1, 2, 3, 7, 20}) {
            const auto parts = partition_dims(d, s);
            REQUIRE(parts.size() == static_cast<std::size_t>(s));
            std::size_t pos = 0, max_sz = 0, min_sz = d + 1;
            for (const auto& [b, e] : parts) {
                CHECK(b == pos);
                CHECK(e >= b);
                pos = e;
                max_sz = std::max(max_sz, e - b);
                min_sz = std::min(min_sz, e - b);
            }
            CHECK(pos == d);
            CHECK(max_sz - min_sz <= 1);
        }
}

TEST_CASE("dimensional_worst_case examples") {
    const GradMatrix m = GradMatrix::from_rows({{1, 1}, {1, 1}});
    const GradMatrix out = dimensional_worst_case(m, {1, 1});
    CHECK(out(0, 0) == -1e20);
    CHECK(out(0, 1) == 1.0);
    CHECK(out(1, 0) == 1.0);
    CHECK(out(1, 1) == -1e20);

    const GradMatrix one = dimensional_worst_case(GradMatrix::from_rows({{-0.5}}), {-0.5});
    CHECK(one(0, 0) == 1e20);  // -1e20 * sign(-0.5) * max(0.5, 1)

    CHECK_THROWS_AS(dimensional_worst_case(GradMatrix::from_rows({{1}, {2}}), {1}),
                    ParameterError);
}

TEST_CASE("dimensional_worst_case corrupts at most one value per column") {
    Rng rng(5);
    const GradMatrix m = random_matrix(rng, 6, 9);
    GradVector g(9);
    for (double& x : g) x = rng.normal();
    const GradMatrix out = dimensional_worst_case(m, g);
    for (std::size_t j = 0; j < 9; ++j) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < 6; ++i)
            if (out(i, j) != m(i, j)) ++c;
        CHECK(c <= 1);
    }
}

TEST_CASE("worker-level attacks replace whole rows only, exactly q rows") {
    Rng rng(23);
    for (AttackKind kind : {AttackKind::Gaussian, AttackKind::Omniscient}) {
        const GradMatrix m = random_matrix(rng, 11, 6);
        AttackSpec spec;
        spec.kind = kind;
        spec.q = 4;
        const GradMatrix out = apply_attack(spec, {99, 3}, m);
        std::size_t rows_replaced = 0;
        for (std::size_t i = 0; i < 11; ++i) {
            const std::size_t diff = count_differing_columns_in_row(m, out, i);
            CHECK((diff == 0 || diff == 6));
            if (diff == 6) ++rows_replaced;
        }
        CHECK(rows_replaced == 4);
    }
}

TEST_CASE("byzantine worker selection") {
    AttackSpec spec;
    spec.kind = AttackKind::Gaussian;
    spec.q = 3;
    CHECK(byzantine_workers(spec, {7, 0}, 10) == std::vector<std::size_t>{0, 1, 2});
    spec.selection = ByzantineSelection::ResampledPerRound;
    const auto a = byzantine_workers(spec, {7, 0}, 10);
    const auto b = byzantine_workers(spec, {7, 0}, 10);
    CHECK(a == b);  // replay-deterministic
    CHECK(a.size() == 3);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1] < a[i]);
    // different rounds eventually give different sets
    bool changed = false;
    for (std::uint64_t r = 1; r < 50 && !changed; ++r)
        changed = byzantine_workers(spec, {7, r}, 10) != a;
    CHECK(changed);
}

TEST_CASE("replay determinism for all attack kinds") {
    Rng rng(77);
    const GradMatrix m = random_matrix(rng, 8, 8);
    for (AttackKind kind : all_attack_kinds()) {
        AttackSpec spec;
        spec.kind = kind;
        spec.q = 2;
        spec.num_servers = 2;
        const GradMatrix a = apply_attack(spec, {13, 4}, m);
        const GradMatrix b = apply_attack(spec, {13, 4}, m);
        CHECK(a == b);
    }
}

TEST_CASE("gambler corruption rate concentrates around prob") {
    AttackSpec spec;
    spec.kind = AttackKind::Gambler;
    spec.num_servers = 1;
    spec.prob = 0.0005;
    spec.factor = -1e20;
    const std::size_t n = 100, d = 100;  // 10^4 eligible values per round
    Rng rng(404);
    std::size_t corrupted = 0, total = 0;
    for (std::uint64_t round = 0; round < 100; ++round) {
        const GradMatrix m = random_matrix(rng, n, d);
        const GradMatrix out = apply_attack(spec, {2718, round}, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                ++total;
                if (out(i, j) != m(i, j)) ++corrupted;
            }
    }
    CHECK(total == 1000000);
    const double rate = static_cast<double>(corrupted) / static_cast<double>(total);
    CHECK(rate > 0.0005 * 0.8);
    CHECK(rate < 0.0005 * 1.2);
}

TEST_CASE("attack name round-trip") {
    for (AttackKind k : all_attack_kinds()) CHECK(attack_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(attack_kind_from_string("gauss"), ParameterError);
}
