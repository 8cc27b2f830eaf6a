#include "porous/correction.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace porous;

TEST_CASE("square cutoff plateau and support") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    CutoffFamily cf = build_cutoff(CutoffKind::square_case, 0.1, 0.2, disk);
    CHECK(cf.value({0.05, 0.05}) == 1.0);
    CHECK(cf.value({0.0, -0.05}) == 1.0);
    CHECK(cf.value({0.101, 0.0}) == 0.0);
    CHECK(cf.value({0.15, 0.15}) == 0.0);
    CHECK(cf.value({0.07, 0.0}) > 0.0);
    CHECK(cf.value({0.07, 0.0}) < 1.0);
    CHECK_THROWS_AS(build_cutoff(CutoffKind::square_case, 0.1, 0.05, disk),
                    std::invalid_argument);
}

TEST_CASE("segment cutoff boundary values") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    double eps = 0.1, d = 0.01;
    CutoffFamily cf = build_cutoff(CutoffKind::segment_case, eps, d, disk);
    CHECK(cf.value({0.0, eps}) == 0.0);
    CHECK(cf.value({0.0, -eps}) == 0.0);
    CHECK(cf.value({0.5 * (eps + d), 0.003}) == 0.0);
    CHECK(cf.value({-0.5 * (eps + d), -0.001}) == 0.0);
    // identically one on the scaled inclusion boundary
    for (int i = 0; i < 256; ++i) {
        Vec2 p = 0.5 * eps * disk.boundary(i / 256.0);
        CHECK(cf.value(p) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("cutoff stays in [0,1] and the gradient matches finite differences") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    std::mt19937_64 rng(5);
    for (auto kind : {CutoffKind::segment_case, CutoffKind::square_case}) {
        double eps = 0.08, d = kind == CutoffKind::square_case ? 0.1 : 0.004;
        CutoffFamily cf = build_cutoff(kind, eps, d, disk);
        std::uniform_real_distribution<double> ux(-cf.cell_half_width(),
                                                  cf.cell_half_width());
        std::uniform_real_distribution<double> uy(-cf.cell_half_height(),
                                                  cf.cell_half_height());
        const double h = 1e-7;
        for (int k = 0; k < 1000; ++k) {
            Vec2 p{ux(rng), uy(rng)};
            double v = cf.value(p);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            Vec2 g = cf.gradient(p);
            double gx = (cf.value({p.x + h, p.y}) - cf.value({p.x - h, p.y})) / (2 * h);
            double gy = (cf.value({p.x, p.y + h}) - cf.value({p.x, p.y - h})) / (2 * h);
            double scale = std::max(1.0 / d, std::max(std::abs(gx), std::abs(gy)));
            CHECK(std::abs(g.x - gx) <= 1e-5 * scale);
            CHECK(std::abs(g.y - gy) <= 1e-5 * scale);
        }
    }
}

TEST_CASE("cutoff norms: hard bound and square-case scaling") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    for (double eps : {0.1, 0.05}) {
        for (double alpha : {1.5, 2.5}) {
            double d = std::pow(eps, alpha);
            CutoffNorms n = cutoff_norms(build_cutoff(CutoffKind::segment_case, eps, d, disk));
            CHECK(n.l2 <= std::sqrt(2.0 * eps * (eps + d)));
        }
    }
    // square case: ||phi|| ~ C eps and ||grad phi|| ~ C, calibrated at eps = 0.2
    CutoffNorms ref = cutoff_norms(build_cutoff(CutoffKind::square_case, 0.2, 0.25, disk));
    double c_l2 = ref.l2 / 0.2, c_grad = ref.grad_l2;
    for (double eps : {0.1, 0.05}) {
        CutoffNorms n = cutoff_norms(build_cutoff(CutoffKind::square_case, eps, 2.0 * eps, disk));
        CHECK(n.l2 / eps == doctest::Approx(c_l2).epsilon(1e-6));
        CHECK(n.grad_l2 == doctest::Approx(c_grad).epsilon(1e-6));
    }
}

TEST_CASE("segment gradient norm tracks the predicted growth") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    double cmin = 1e300, cmax = 0.0;
    for (double eps : {0.1, 0.05, 0.025}) {
        double d = std::pow(eps, 2.5);
        CutoffNorms n = cutoff_norms(build_cutoff(CutoffKind::segment_case, eps, d, disk));
        double pred = 1.0 + std::pow(eps / d, 0.25);
        double c = n.grad_l2 / pred;
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
    }
    CHECK(cmax / cmin <= 2.0);
}

namespace {

CorrectionField make_field(const InclusionShape& shape, double eps, double d,
                           LayoutKind lk, CutoffKind ck) {
    ConformalMap map = build_map(shape, 64);
    SourceVorticity f = SourceVorticity::circular_patch({0.5, 1.5}, 0.25, 1.0);
    PorousLayout lay = make_layout(shape, eps, d, lk);
    return CorrectionField(lay, map, build_cutoff(ck, eps, d, shape), f);
}

} // namespace

TEST_CASE("correction equals the plane field outside the cells") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    CorrectionField field = make_field(disk, 0.1, 0.01, LayoutKind::segment,
                                       CutoffKind::segment_case);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ux(-1.0, 2.0), uy(0.12, 2.0);
    for (int k = 0; k < 200; ++k) {
        Vec2 x{ux(rng), uy(rng)};
        Vec2 v = field.velocity(x);
        Vec2 u = biot_savart_plane(field.source(), x);
        CHECK(v.x == u.x); // bit-exact outside the supports
        CHECK(v.y == u.y);
    }
}

TEST_CASE("correction is tangent on every inclusion boundary") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    CorrectionField field = make_field(disk, 0.1, 0.01, LayoutKind::segment,
                                       CutoffKind::segment_case);
    const PorousLayout& lay = field.layout();
    for (int c = 0; c < field.n_cells(); c += 3) {
        for (int i = 0; i < 128; i += 7) {
            double th = 2.0 * pi * (i + 0.5) / 128.0;
            Vec2 n{std::cos(th), std::sin(th)};
            Vec2 x = lay.centers[c] + 0.5 * lay.eps * n;
            Vec2 v = field.velocity(x);
            CHECK(std::abs(v.dot(n)) <= 1e-8);
        }
    }
}

TEST_CASE("single-inclusion correction matches the image system on the plateau") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    double eps = 0.45, d = 0.2; // N = 1
    CorrectionField field = make_field(disk, eps, d, LayoutKind::segment,
                                       CutoffKind::segment_case);
    REQUIRE(field.n_cells() == 1);
    Vec2 z = field.layout().centers[0];
    const SourceVorticity& f = field.source();
    auto nodes = f.quadrature_nodes(16, 48);
    double h = 0.5 * eps;

    for (double t : {0.35, 0.55, 0.75}) {
        // point midway between the scaled boundary and the cutoff envelope
        double y = h * t;
        double bx = h * disk.half_width(t);
        double ex = field.cutoff().cell_half_width() - field.cutoff().lateral_gap(y);
        Vec2 x = z + Vec2{0.5 * (bx + ex), y};
        REQUIRE(field.cutoff().value(x - z) == doctest::Approx(1.0).epsilon(1e-14));

        Vec2 oracle{0, 0};
        for (const auto& n : nodes) {
            Vec2 ly = (n.pos - z) / h, lx = (x - z) / h;
            Vec2 d1 = lx - ly, d2 = lx - reflect(ly);
            oracle += n.wf / h *
                      (d1.perp() / d1.norm2() - d2.perp() / d2.norm2() +
                       lx.perp() / lx.norm2());
        }
        oracle = oracle / (2.0 * pi);
        Vec2 v = field.velocity(x);
        CHECK((v - oracle).norm() <= 1e-6 * std::max(oracle.norm(), 1e-6));
    }
}

TEST_CASE("disk cells annihilate the first and third terms") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    CorrectionField field = make_field(disk, 0.1, 0.01, LayoutKind::segment,
                                       CutoffKind::segment_case);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ui(0.0, 1.0);
    int found = 0;
    while (found < 25) {
        Vec2 x{ui(rng), (ui(rng) - 0.5) * 0.2};
        if (!field.layout().in_fluid(x)) continue;
        int cell = field.locate_cell(x);
        if (cell < 0) continue;
        auto wt = field.w_terms(cell % field.layout().n_cols, 0, x);
        CHECK(std::abs(wt.w1) < 1e-13);
        CHECK(wt.w3.norm() < 1e-13);
        CHECK(std::abs(wt.w2) > 0.0); // the surviving terms are genuine
        ++found;
    }
}

TEST_CASE("reconstruction identity at sampled cell points") {
    InclusionShape ell = make_shape(ShapeKind::ellipse, {.ellipse_b = 0.5});
    CorrectionField field = make_field(ell, 0.1, 0.005, LayoutKind::segment,
                                       CutoffKind::segment_case);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ui(0.0, 1.0);
    int found = 0;
    while (found < 20) {
        Vec2 x{ui(rng), (ui(rng) - 0.5) * 0.2};
        if (!field.layout().in_fluid(x)) continue;
        int cell = field.locate_cell(x);
        if (cell < 0) continue;
        Vec2 z = field.layout().centers[cell];
        Vec2 lhs = biot_savart_plane(field.source(), x) - field.velocity(x);
        auto wt = field.w_terms(cell % field.layout().n_cols, 0, x);
        double phi = field.cutoff().value(x - z);
        Vec2 g = field.cutoff().gradient(x - z);
        Vec2 rhs = (Vec2{-g.y, g.x} * (wt.w1 + wt.w2) + (wt.w3 + wt.w4) * phi) / (2.0 * pi);
        CHECK((lhs - rhs).norm() <= 1e-5);
        ++found;
    }
}

TEST_CASE("ellipse w1, w2 scale like eps over the cell") {
    InclusionShape ell = make_shape(ShapeKind::ellipse, {.ellipse_b = 0.5});
    double cmax = 0.0, cmin = 1e300;
    for (double eps : {0.1, 0.05, 0.025}) {
        CorrectionField field = make_field(ell, eps, 0.3 * eps, LayoutKind::segment,
                                           CutoffKind::segment_case);
        double sup = 0.0;
        int c = field.n_cells() / 2;
        Vec2 z = field.layout().centers[c];
        for (int i = 0; i < 40; ++i) {
            double th = 2.0 * pi * i / 40.0;
            Vec2 x = z + 0.35 * eps * Vec2{std::cos(th), std::sin(th)};
            if (!field.layout().in_fluid(x) || field.locate_cell(x) != c) continue;
            auto wt = field.w_terms(c % field.layout().n_cols, 0, x);
            sup = std::max({sup, std::abs(wt.w1), std::abs(wt.w2)});
        }
        cmax = std::max(cmax, sup / eps);
        cmin = std::min(cmin, sup / eps);
    }
    CHECK(cmax / cmin <= 2.0);
}

TEST_CASE("discrepancy of an empty layout vanishes") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    PorousLayout empty;
    empty.shape = disk;
    empty.eps = 0.1;
    empty.dist = 0.01;
    empty.n_cols = 0;
    empty.n_rows = 0;
    CutoffFamily cf = build_cutoff(CutoffKind::segment_case, 0.1, 0.01, disk);
    CorrectionField field(empty, build_map(disk), cf,
                          SourceVorticity::circular_patch({0.5, 1.5}, 0.25, 1.0));
    CHECK(field.discrepancy_l2() == 0.0);
}

TEST_CASE("source overlapping a cell is rejected") {
    InclusionShape disk = make_shape(ShapeKind::disk);
    PorousLayout lay = make_layout(disk, 0.1, 0.01, LayoutKind::segment);
    CutoffFamily cf = build_cutoff(CutoffKind::segment_case, 0.1, 0.01, disk);
    CHECK_THROWS_AS(CorrectionField(lay, build_map(disk), cf,
                                    SourceVorticity::circular_patch({0.5, 0.1}, 0.25, 1.0)),
                    std::invalid_argument);
}
