#include "doctest.h"

#include <cmath>

#include "magpie/fft.hpp"
#include "magpie/field.hpp"
#include "magpie/rng.hpp"

using namespace magpie;

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

ComplexField2D random_cfield(Rng &rng, int m) {
    ComplexField2D f(m, m);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = cplx(2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0);
    return f;
}

// Quadratic-time reference transform, written straight from the definition:
// W[p,q] = sum_{i,j} f[i,j] * exp(-2*pi*I*(p*i + q*j)/m). Unnormalized, so
// the library's forward transform must match it exactly (up to roundoff).
ComplexField2D naive_dft2(const ComplexField2D &f) {
    const int m = f.width();
    ComplexField2D out(m, m);
    for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
            cplx s(0.0, 0.0);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    const double ang = -2.0 * kPi * (static_cast<double>(p) * i + static_cast<double>(q) * j) / m;
                    s += f.at(i, j) * cplx(std::cos(ang), std::sin(ang));
                }
            }
            out.at(p, q) = s;
        }
    }
    return out;
}

} // namespace

TEST_CASE("forward transform matches the quadratic-time definition") {
    Rng rng(21);
    for (const int m : {1, 2, 4, 8, 16}) {
        const ComplexField2D f = random_cfield(rng, m);
        const ComplexField2D fast = dft2(f);
        const ComplexField2D slow = naive_dft2(f);
        const double scale = std::max(1.0, norm_inf(slow));
        for (std::size_t i = 0; i < fast.size(); ++i)
            CHECK(std::abs(fast[i] - slow[i]) / scale <= 1e-12);
    }
}

TEST_CASE("impulse at the origin transforms to the all-ones spectrum") {
    ComplexField2D f(8, 8);
    f.at(0, 0) = cplx(1.0, 0.0);
    const ComplexField2D w = dft2(f);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(w[i] - cplx(1.0, 0.0)) <= 1e-14);
}

TEST_CASE("round trip idft2(dft2(f)) recovers f") {
    Rng rng(22);
    for (const int m : {2, 8, 32}) {
        const ComplexField2D f = random_cfield(rng, m);
        const ComplexField2D back = idft2(dft2(f));
        const double scale = std::max(1.0, norm_inf(f));
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(std::abs(back[i] - f[i]) / scale <= 1e-12);
        // and in the other order
        const ComplexField2D back2 = dft2(idft2(f));
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(std::abs(back2[i] - f[i]) / scale <= 1e-12);
    }
}

TEST_CASE("energy scaling: ||dft2(f)||^2 = m^2 ||f||^2") {
    Rng rng(23);
    for (const int m : {4, 16, 64}) {
        const ComplexField2D f = random_cfield(rng, m);
        const double ratio = norm2_sq(dft2(f)) / norm2_sq(f);
        CHECK(ratio == doctest::Approx(static_cast<double>(m) * m).epsilon(1e-10));
    }
}

TEST_CASE("linearity against the oracle") {
    Rng rng(24);
    const int m = 8;
    const ComplexField2D a = random_cfield(rng, m);
    const ComplexField2D b = random_cfield(rng, m);
    const cplx alpha(0.7, -1.3);
    ComplexField2D combo(m, m);
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = alpha * a[i] + b[i];
    const ComplexField2D lhs = dft2(combo);
    const ComplexField2D fa = dft2(a);
    const ComplexField2D fb = dft2(b);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK(std::abs(lhs[i] - (alpha * fa[i] + fb[i])) <= 1e-11);
}

TEST_CASE("in-place and copying forms agree; non-square or non-power-of-two rejected") {
    Rng rng(25);
    const ComplexField2D f = random_cfield(rng, 16);
    ComplexField2D g = f;
    dft2_inplace(g);
    const ComplexField2D h = dft2(f);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == h[i]);

    ComplexField2D back = g;
    idft2_inplace(back);
    const ComplexField2D back2 = idft2(g);
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == back2[i]);

    ComplexField2D bad1(4, 8);
    CHECK_THROWS_AS(dft2_inplace(bad1), std::invalid_argument);
    ComplexField2D bad2(6, 6);
    CHECK_THROWS_AS(dft2_inplace(bad2), std::invalid_argument);
}
