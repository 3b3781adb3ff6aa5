#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "noma_ris/pathloss.hpp"

using namespace noma_ris;
using namespace noma_ris::pathloss;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LinkBudgetConfig zero_tables() {
    LinkBudgetConfig cfg;
    cfg.zenith = ZenithAttenuationTable({1e9, 1e10}, {0.0, 0.0});
    cfg.clutter = PathLossTable::constant(0.0);
    cfg.shadowing = PathLossTable::constant(0.0);
    return cfg;
}

}  // namespace

TEST_CASE("free-space loss closed form", "[pathloss]") {
    CHECK(free_space_loss(1.0, 1.0) == -147.55);
    // mpmath, 30 digits
    CHECK_THAT(free_space_loss(2e9, 1000.0), WithinAbs(98.4705999132796239, 1e-9));
    CHECK_THAT(free_space_loss(2e9, 550e3), WithinAbs(153.277853703164501, 1e-9));
    CHECK_THROWS_AS(free_space_loss(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(free_space_loss(1.0, -5.0), DomainError);
}

TEST_CASE("free-space loss is strictly increasing in f and d", "[pathloss]") {
    for (double f = 1e8; f < 1e11; f *= 1.7) {
        for (double d = 1.0; d < 1e7; d *= 3.1) {
            CHECK(free_space_loss(f * 1.01, d) > free_space_loss(f, d));
            CHECK(free_space_loss(f, d * 1.01) > free_space_loss(f, d));
        }
    }
}

TEST_CASE("atmospheric absorption scales with cosecant", "[pathloss]") {
    const double z = 0.07;
    CHECK(atmospheric_loss(z, 90.0) == z);
    CHECK_THAT(atmospheric_loss(z, 30.0), WithinRel(2.0 * z, 1e-12));
    CHECK_THAT(atmospheric_loss(z, 45.0), WithinAbs(0.0989949493661166534, 1e-12));
    CHECK_THROWS_AS(atmospheric_loss(z, 0.0), DomainError);
    CHECK_THROWS_AS(atmospheric_loss(z, -1.0), DomainError);
    CHECK_THROWS_AS(atmospheric_loss(z, 90.5), DomainError);

    double previous = atmospheric_loss(z, 0.5);
    for (double theta = 1.0; theta <= 90.0; theta += 0.5) {
        const double now = atmospheric_loss(z, theta);
        CHECK(now <= previous);
        previous = now;
    }

    const ZenithAttenuationTable table({1e9, 2e9, 4e9}, {0.06, 0.07, 0.08});
    CHECK_THAT(atmospheric_loss(table, 2e9, 90.0), WithinAbs(0.07, 1e-15));
    CHECK_THAT(atmospheric_loss(table, 3e9, 90.0), WithinAbs(0.075, 1e-15));
}

TEST_CASE("table interpolation", "[pathloss]") {
    const PathLossTable linear({0.0, 90.0}, {30.0, 0.0});
    CHECK_THAT(table_loss(linear, 45.0).loss_db, WithinAbs(15.0, 1e-12));

    const PathLossTable t({10.0, 30.0, 90.0}, {34.3, 25.0, 12.0});
    CHECK_THAT(table_loss(t, 20.0).loss_db, WithinAbs(29.65, 1e-12));
    for (std::size_t i = 0; i < 3; ++i) {
        const auto hit = table_loss(t, t.elevation_deg()[i]);
        CHECK(hit.loss_db == t.loss_db()[i]);
        CHECK_FALSE(hit.clamped);
    }

    SECTION("out of range clamps and flags") {
        const auto low = table_loss(t, 5.0);
        CHECK(low.loss_db == 34.3);
        CHECK(low.clamped);
        const auto high = table_loss(t, 95.0);
        CHECK(high.loss_db == 12.0);
        CHECK(high.clamped);
    }

    SECTION("construction rejects malformed tables") {
        CHECK_THROWS_AS(PathLossTable({10.0}, {1.0}), DomainError);
        CHECK_THROWS_AS(PathLossTable({10.0, 10.0}, {1.0, 2.0}), DomainError);
        CHECK_THROWS_AS(PathLossTable({10.0, 20.0}, {1.0, -2.0}), DomainError);
        CHECK_THROWS_AS(PathLossTable({10.0, 20.0}, {1.0}), DomainError);
    }
}

TEST_CASE("path loss table CSV", "[pathloss]") {
    const auto path = std::filesystem::temp_directory_path() / "noma_ris_table_test.csv";
    {
        std::ofstream out(path);
        out << "elevation_deg,loss_db\n10,34.3\n30,25.0\n90,12.0\n";
    }
    const PathLossTable t = load_table_csv(path.string());
    CHECK(t == PathLossTable({10.0, 30.0, 90.0}, {34.3, 25.0, 12.0}));

    {
        std::ofstream out(path);
        out << "theta,loss\n10,1\n20,2\n";
    }
    CHECK_THROWS_AS(load_table_csv(path.string()), DomainError);
    std::filesystem::remove(path);
    CHECK_THROWS(load_table_csv(path.string()));
}

TEST_CASE("link losses compose their components", "[pathloss]") {
    SECTION("zero tables reduce to free space") {
        const LinkBudgetConfig cfg = zero_tables();
        const auto pl = compute_link_losses(cfg, 60.0);
        CHECK(pl.pl_sat_user == free_space_loss(cfg.frequency_hz, cfg.d_sat_user_m));
        CHECK(pl.pl_sat_ris == free_space_loss(cfg.frequency_hz, cfg.d_sat_ris_m));
        CHECK(pl.pl_bs_user == free_space_loss(cfg.frequency_hz, cfg.d_bs_user_m));
        CHECK(pl.pl_bs_ris == free_space_loss(cfg.frequency_hz, cfg.d_bs_ris_m));
        CHECK(pl.pl_ris_user == free_space_loss(cfg.frequency_hz, cfg.d_ris_user_m));
    }

    SECTION("satellite-user loss adds absorption and clutter") {
        LinkBudgetConfig cfg = zero_tables();
        cfg.zenith = ZenithAttenuationTable({1e9, 1e10}, {0.1, 0.1});
        cfg.clutter = PathLossTable::constant(20.0);
        const auto pl = compute_link_losses(cfg, 90.0);
        CHECK_THAT(pl.pl_sat_user, WithinAbs(173.38, 0.005));
        CHECK_THAT(pl.pl_sat_user, WithinAbs(153.277853703164501 + 0.1 + 20.0, 1e-9));
        // The RIS sits above the clutter.
        CHECK_THAT(pl.pl_sat_ris, WithinAbs(153.277853703164501 + 0.1, 1e-9));
    }

    SECTION("term-by-term cross-check over elevations") {
        LinkBudgetConfig cfg;
        cfg.zenith = ZenithAttenuationTable({1e9, 4e9}, {0.06, 0.08});
        cfg.clutter = PathLossTable({10, 50, 90}, {34.3, 26.8, 25.5});
        cfg.shadowing = PathLossTable({10, 90}, {15.5, 9.2});
        const double bs_ris = compute_link_losses(cfg, 10.0).pl_bs_ris;
        for (double theta = 10.0; theta <= 90.0; theta += 2.5) {
            const LossOffsets off{1.25, -0.5};
            const auto pl = compute_link_losses(cfg, theta, off);
            const double ls = table_loss(cfg.shadowing, theta).loss_db + off.shadowing_db;
            const double lx = table_loss(cfg.clutter, theta).loss_db + off.clutter_db;
            const double lt = atmospheric_loss(cfg.zenith.at(cfg.frequency_hz), theta);
            const double f = cfg.frequency_hz;
            CHECK_THAT(pl.pl_ris_user, WithinAbs(free_space_loss(f, cfg.d_ris_user_m) + ls, 1e-12));
            CHECK_THAT(pl.pl_bs_user, WithinAbs(free_space_loss(f, cfg.d_bs_user_m) + ls, 1e-12));
            CHECK_THAT(pl.pl_sat_user, WithinAbs(free_space_loss(f, cfg.d_sat_user_m) + lt + lx, 1e-12));
            CHECK_THAT(pl.pl_sat_ris, WithinAbs(free_space_loss(f, cfg.d_sat_ris_m) + lt, 1e-12));
            CHECK(pl.pl_bs_ris == bs_ris);
        }
    }

    SECTION("zero elevation is rejected by the absorption term") {
        CHECK_THROWS_AS(compute_link_losses(zero_tables(), 0.0), DomainError);
    }
}

TEST_CASE("dB and linear conversions round-trip", "[pathloss]") {
    for (double db = -200.0; db <= 200.0; db += 0.37) {
        CHECK_THAT(linear_to_db(db_to_linear(db)), WithinAbs(db, 1e-12 * std::max(1.0, std::abs(db))));
        CHECK_THAT(loss_amplitude(db) * loss_amplitude(db), WithinRel(1.0 / db_to_linear(db), 1e-12));
    }
}
