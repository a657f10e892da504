#include "doctest.h"

#include <complex>
#include <vector>

#include "magpie/field.hpp"
#include "magpie/rng.hpp"

using namespace magpie;

namespace {

ComplexField2D random_cfield(Rng &rng, int w, int h) {
    ComplexField2D f(w, h);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = cplx(2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0);
    return f;
}

} // namespace

TEST_CASE("field construction and indexing") {
    ComplexField2D f(3, 2, cplx(1.0, -2.0));
    CHECK(f.width() == 3);
    CHECK(f.height() == 2);
    CHECK(f.size() == 6);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == cplx(1.0, -2.0));

    // row-major layout: at(row, col) == data[row*width + col]
    f.at(1, 2) = cplx(9.0, 0.0);
    CHECK(f[1 * 3 + 2] == cplx(9.0, 0.0));
}

TEST_CASE("cmul matches std::complex multiplication") {
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        const cplx a(2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0);
        const cplx b(2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0);
        const cplx ref = a * b;
        CHECK(std::abs(cmul(a, b) - ref) <= 1e-15);
        CHECK(abs2(a) == doctest::Approx(std::norm(a)).epsilon(1e-14));
    }
}

TEST_CASE("extract_region: full window, zeros, interior enumeration") {
    // offset (0,0) with m = n returns the whole object
    Rng rng(2);
    const ComplexField2D obj = random_cfield(rng, 4, 4);
    const ComplexField2D whole = extract_region(obj, RegionIndex{0, 0, 0}, 4);
    for (std::size_t i = 0; i < obj.size(); ++i) CHECK(whole[i] == obj[i]);

    // zero object gives a zero region
    const ComplexField2D zeros(4, 4);
    const ComplexField2D zr = extract_region(zeros, RegionIndex{0, 1, 1}, 2);
    for (std::size_t i = 0; i < zr.size(); ++i) CHECK(zr[i] == cplx(0.0, 0.0));

    // distinct entries, offset (1,1), m=2: the four interior pixels
    ComplexField2D distinct(4, 4);
    for (int i = 0; i < 16; ++i) distinct[static_cast<std::size_t>(i)] = cplx(i, 0.0);
    const ComplexField2D inner = extract_region(distinct, RegionIndex{0, 1, 1}, 2);
    CHECK(inner.at(0, 0) == cplx(5.0, 0.0));
    CHECK(inner.at(0, 1) == cplx(6.0, 0.0));
    CHECK(inner.at(1, 0) == cplx(9.0, 0.0));
    CHECK(inner.at(1, 1) == cplx(10.0, 0.0));

    CHECK_THROWS_AS((void)extract_region(obj, RegionIndex{0, 3, 0}, 2), std::out_of_range);
    CHECK_THROWS_AS((void)extract_region(obj, RegionIndex{0, -1, 0}, 2), std::out_of_range);
}

TEST_CASE("embed_add_region: window recovery, overlap sums, write_region") {
    Rng rng(3);
    const ComplexField2D patch = random_cfield(rng, 2, 2);

    // embed into zeros then extract recovers the patch
    ComplexField2D obj(5, 5);
    const RegionIndex r{0, 2, 1};
    embed_add_region_into(obj, patch, r);
    const ComplexField2D back = extract_region(obj, r, 2);
    for (std::size_t i = 0; i < patch.size(); ++i) CHECK(back[i] == patch[i]);
    // untouched pixels stay zero
    CHECK(obj.at(0, 0) == cplx(0.0, 0.0));
    CHECK(obj.at(4, 4) == cplx(0.0, 0.0));

    // two overlapping embeds accumulate on the shared pixels
    ComplexField2D acc(3, 3);
    ComplexField2D ones(2, 2, cplx(1.0, 0.0));
    embed_add_region_into(acc, ones, RegionIndex{0, 0, 0});
    embed_add_region_into(acc, ones, RegionIndex{1, 1, 1});
    CHECK(acc.at(1, 1) == cplx(2.0, 0.0)); // overlap pixel
    CHECK(acc.at(0, 0) == cplx(1.0, 0.0));
    CHECK(acc.at(2, 2) == cplx(1.0, 0.0));
    CHECK(acc.at(0, 2) == cplx(0.0, 0.0));

    // write_region replaces rather than accumulates
    ComplexField2D target(3, 3, cplx(5.0, 0.0));
    write_region(target, ones, RegionIndex{0, 1, 1});
    CHECK(target.at(1, 1) == cplx(1.0, 0.0));
    CHECK(target.at(0, 0) == cplx(5.0, 0.0));

    ComplexField2D wrong(3, 3);
    CHECK_THROWS_AS(embed_add_region_into(wrong, patch, RegionIndex{0, 2, 2}),
                    std::out_of_range);
}

TEST_CASE("per-pixel accumulation oracle: summed embeds of probe energy") {
    // n=8, m=4, step 2: accumulate |Q|^2 through embed_add and compare with a
    // brute-force per-pixel loop over all covering regions.
    const int n = 8, m = 4, step = 2;
    Rng rng(4);
    RealField2D q2(m, m);
    for (std::size_t i = 0; i < q2.size(); ++i) q2[i] = rng.uniform01();

    std::vector<RegionIndex> regions;
    int k = 0;
    for (int i = 0; i + m <= n; i += step)
        for (int j = 0; j + m <= n; j += step) regions.push_back(RegionIndex{k++, i, j});

    RealField2D acc(n, n);
    for (const RegionIndex &r : regions) embed_add_region_into(acc, q2, r);

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double expected = 0.0;
            for (const RegionIndex &r : regions) {
                const int di = i - r.offset_row, dj = j - r.offset_col;
                if (di >= 0 && di < m && dj >= 0 && dj < m) expected += q2.at(di, dj);
            }
            CHECK(acc.at(i, j) == doctest::Approx(expected).epsilon(1e-13));
        }
    }
}

TEST_CASE("extract/embed adjointness") {
    // <extract(a,r), b> == <a, embed_add(zeros, b, r)> for the complex dot
    // product, i.e. windowing and zero-padded embedding are adjoint maps.
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const ComplexField2D a = random_cfield(rng, 6, 6);
        const ComplexField2D b = random_cfield(rng, 3, 3);
        const RegionIndex r{0, static_cast<int>(rng.bounded(4)), static_cast<int>(rng.bounded(4))};
        const ComplexField2D ar = extract_region(a, r, 3);
        const ComplexField2D eb = embed_add_region(ComplexField2D(6, 6), b, r);

        cplx lhs(0.0, 0.0), rhs(0.0, 0.0);
        for (std::size_t i = 0; i < ar.size(); ++i) lhs += cmul(std::conj(ar[i]), b[i]);
        for (std::size_t i = 0; i < a.size(); ++i) rhs += cmul(std::conj(a[i]), eb[i]);
        CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
}

TEST_CASE("elementwise algebra helpers") {
    Rng rng(6);
    const ComplexField2D a = random_cfield(rng, 4, 4);
    const ComplexField2D b = random_cfield(rng, 4, 4);

    const ComplexField2D h = hadamard(a, b);
    const ComplexField2D cj = conj_field(a);
    const RealField2D a2 = abs2_field(a);
    const RealField2D am = abs_field(a);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(h[i] - a[i] * b[i]) <= 1e-15);
        CHECK(cj[i] == std::conj(a[i]));
        CHECK(a2[i] == doctest::Approx(std::norm(a[i])).epsilon(1e-14));
        CHECK(am[i] == doctest::Approx(std::abs(a[i])).epsilon(1e-14));
    }

    // div_or_zero: exact where the denominator is nonzero, 0 at 0/0
    RealField2D num(2, 2);
    RealField2D den(2, 2);
    num[0] = 3.0; den[0] = 2.0;
    num[1] = 0.0; den[1] = 0.0;
    num[2] = 5.0; den[2] = 0.0; // x/0 with x != 0 also maps to 0 by convention
    num[3] = -1.0; den[3] = 4.0;
    const RealField2D q = div_or_zero(num, den);
    CHECK(q[0] == doctest::Approx(1.5));
    CHECK(q[1] == 0.0);
    CHECK(q[2] == 0.0);
    CHECK(q[3] == doctest::Approx(-0.25));

    // norms against direct summation
    double sq = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sq += std::norm(a[i]);
        peak = std::max(peak, std::abs(a[i]));
    }
    CHECK(norm2_sq(a) == doctest::Approx(sq).epsilon(1e-13));
    CHECK(norm2(a) == doctest::Approx(std::sqrt(sq)).epsilon(1e-13));
    CHECK(norm_inf(a) == doctest::Approx(peak).epsilon(1e-13));

    // re_inner is the Euclidean inner product of the real embedding
    double direct = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        direct += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    CHECK(re_inner(a, b) == doctest::Approx(direct).epsilon(1e-13));

    CHECK(all_finite(a));
    ComplexField2D bad = a;
    bad[3] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK(!all_finite(bad));

    CHECK_THROWS_AS((void)hadamard(a, random_cfield(rng, 2, 2)), std::invalid_argument);
}
