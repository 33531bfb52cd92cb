#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <stdexcept>

#include "polburst/wigner.hpp"

using namespace polburst::wigner;

TEST_CASE("3j frozen values")
{
    CHECK(wigner3j(1, 1, 0, 0, 0, 0) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-13));
    CHECK(wigner3j(1, 1, 2, 0, 0, 0) == doctest::Approx(std::sqrt(2.0 / 15.0)).epsilon(1e-13));
    CHECK(wigner3j(2, 1, 1, 0, 0, 0) == doctest::Approx(std::sqrt(2.0 / 15.0)).epsilon(1e-13));
    CHECK(wigner3j(1, 1, 1, 0, 0, 0) == doctest::Approx(0.0));
    // closed form (j j 0; m -m 0) = (-1)^{j-m}/sqrt(2j+1)
    for (double j : {0.5, 1.0, 1.5, 2.0, 2.5}) {
        for (double m = -j; m <= j + 0.1; m += 1.0) {
            const double expected = std::pow(-1.0, j - m) / std::sqrt(2.0 * j + 1.0);
            CHECK(wigner3j(j, j, 0, m, -m, 0) == doctest::Approx(expected).epsilon(1e-13));
        }
    }
}

TEST_CASE("3j selection rules and errors")
{
    CHECK(wigner3j(1, 1, 3, 0, 0, 0) == 0.0);            // triangle violation
    CHECK(wigner3j(1, 1, 1, 1, 1, -2) == doctest::Approx(0.0));
    CHECK(wigner3j(1, 1, 1, 1, 1, 0) == 0.0);            // m sum nonzero
    CHECK_THROWS_AS(wigner3j(0.3, 1, 1, 0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(wigner3j(1, 1, 1, 0.5, -0.5, 0), std::invalid_argument);
}

TEST_CASE("3j orthogonality for all j up to 4")
{
    for (double j1 = 0; j1 <= 4.0; j1 += 0.5) {
        for (double j2 = 0; j2 <= 4.0; j2 += 0.5) {
            for (double j3 = std::abs(j1 - j2); j3 <= j1 + j2 + 0.1; j3 += 1.0) {
                for (double m3 = -j3; m3 <= j3 + 0.1; m3 += 1.0) {
                    double sum = 0.0;
                    for (double m1 = -j1; m1 <= j1 + 0.1; m1 += 1.0) {
                        const double m2 = -m3 - m1;
                        if (std::abs(m2) > j2 + 0.1) continue;
                        const double w = wigner3j(j1, j2, j3, m1, m2, m3);
                        sum += (2.0 * j3 + 1.0) * w * w;
                    }
                    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("6j frozen values and special formula")
{
    CHECK(wigner6j(1, 1, 1, 1, 1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    // {j1 j2 j3; 0 j3 j2} = (-1)^{j1+j2+j3}/sqrt((2j2+1)(2j3+1))
    CHECK(wigner6j(1, 2, 3, 0, 3, 2) ==
          doctest::Approx(1.0 / std::sqrt(35.0)).epsilon(1e-13));
    CHECK(wigner6j(2, 1.5, 0.5, 0, 0.5, 1.5) ==
          doctest::Approx(std::pow(-1.0, 4.0) / std::sqrt(8.0)).epsilon(1e-13));
    CHECK(wigner6j(1, 1, 1, 1, 1, 3) == 0.0);  // triangle violation
}

TEST_CASE("6j orthogonality")
{
    // {j1 j2 x; j3 j4 y} needs y in triangle with (j1, j4) and (j3, j2)
    const double j1 = 1.0, j2 = 1.5, j3 = 0.5, j4 = 1.0;
    for (double y = 1.0; y <= 2.0; y += 1.0) {
        for (double z = 1.0; z <= 2.0; z += 1.0) {
            double sum = 0.0;
            for (double x = 0.0; x <= 3.0; x += 0.5) {
                sum += (2.0 * x + 1.0) * (2.0 * y + 1.0) *
                       wigner6j(j1, j2, x, j3, j4, y) * wigner6j(j1, j2, x, j3, j4, z);
            }
            CHECK(sum == doctest::Approx(y == z ? 1.0 : 0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("Clebsch-Gordan frozen values")
{
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 0) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
    CHECK(clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) ==
          doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-13));
    CHECK(clebsch_gordan(1, 0, 1, 0, 2, 0) ==
          doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-13));
    CHECK(clebsch_gordan(1, 1, 1, -1, 0, 0) ==
          doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-13));
    CHECK(clebsch_gordan(1, 1, 1, 0, 2, 1) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
    // highest-weight coupling is always +1 (Condon-Shortley convention)
    CHECK(clebsch_gordan(2, 2, 1, 1, 3, 3) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Clebsch-Gordan completeness")
{
    const double j1 = 1.5, j2 = 1.0;
    for (double m1 = -j1; m1 <= j1 + 0.1; m1 += 1.0) {
        for (double m2 = -j2; m2 <= j2 + 0.1; m2 += 1.0) {
            double sum = 0.0;
            for (double j3 = std::abs(j1 - j2); j3 <= j1 + j2 + 0.1; j3 += 1.0) {
                const double c = clebsch_gordan(j1, m1, j2, m2, j3, m1 + m2);
                sum += c * c;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}
