#include "polburst/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polburst::wigner {

namespace {

constexpr int kMaxFact = 70;

const long double* factorial_table()
{
    static long double table[kMaxFact + 1] = {};
    static bool init = false;
    if (!init) {
        table[0] = 1.0L;
        for (int i = 1; i <= kMaxFact; ++i) {
            table[i] = table[i - 1] * static_cast<long double>(i);
        }
        init = true;
    }
    return table;
}

long double fact(int n)
{
    if (n < 0 || n > kMaxFact) {
        throw std::invalid_argument("wigner: factorial argument out of range");
    }
    return factorial_table()[n];
}

// doubled representation: returns 2x the input, throws if not half-integral
int doubled(double j, const char* what)
{
    const double t = 2.0 * j;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) {
        throw std::invalid_argument(std::string("wigner: ") + what +
                                    " is not a half-integer");
    }
    return static_cast<int>(r);
}

bool triangle_ok(int tj1, int tj2, int tj3)
{
    if ((tj1 + tj2 + tj3) % 2 != 0) return false;
    return tj3 >= std::abs(tj1 - tj2) && tj3 <= tj1 + tj2;
}

// (j1+j2-j3)! (j1-j2+j3)! (-j1+j2+j3)! / (j1+j2+j3+1)!
long double triangle_coeff(int tj1, int tj2, int tj3)
{
    return fact((tj1 + tj2 - tj3) / 2) * fact((tj1 - tj2 + tj3) / 2) *
           fact((-tj1 + tj2 + tj3) / 2) / fact((tj1 + tj2 + tj3) / 2 + 1);
}

} // namespace

double wigner3j(double j1, double j2, double j3,
                double m1, double m2, double m3)
{
    const int tj1 = doubled(j1, "j1"), tj2 = doubled(j2, "j2"), tj3 = doubled(j3, "j3");
    const int tm1 = doubled(m1, "m1"), tm2 = doubled(m2, "m2"), tm3 = doubled(m3, "m3");
    if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0) {
        throw std::invalid_argument("wigner3j: j+m must be integral");
    }
    if (tm1 + tm2 + tm3 != 0) return 0.0;
    if (!triangle_ok(tj1, tj2, tj3)) return 0.0;
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return 0.0;

    // Racah sum
    const int kmin = std::max({0, (tj2 - tj3 - tm1) / 2, (tj1 - tj3 + tm2) / 2});
    const int kmax = std::min({(tj1 + tj2 - tj3) / 2, (tj1 - tm1) / 2, (tj2 + tm2) / 2});
    if (kmin > kmax) return 0.0;

    long double sum = 0.0L;
    for (int k = kmin; k <= kmax; ++k) {
        long double term = 1.0L /
            (fact(k) * fact((tj1 + tj2 - tj3) / 2 - k) * fact((tj1 - tm1) / 2 - k) *
             fact((tj2 + tm2) / 2 - k) * fact((tj3 - tj2 + tm1) / 2 + k) *
             fact((tj3 - tj1 - tm2) / 2 + k));
        sum += (k % 2 == 0) ? term : -term;
    }

    long double pref = std::sqrt(triangle_coeff(tj1, tj2, tj3) *
                                 fact((tj1 + tm1) / 2) * fact((tj1 - tm1) / 2) *
                                 fact((tj2 + tm2) / 2) * fact((tj2 - tm2) / 2) *
                                 fact((tj3 + tm3) / 2) * fact((tj3 - tm3) / 2));
    const int phase = (tj1 - tj2 - tm3) / 2;
    const double sign = (((phase % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
    return static_cast<double>(sign * pref * sum);
}

double wigner6j(double j1, double j2, double j3,
                double j4, double j5, double j6)
{
    const int a = doubled(j1, "j1"), b = doubled(j2, "j2"), c = doubled(j3, "j3");
    const int d = doubled(j4, "j4"), e = doubled(j5, "j5"), f = doubled(j6, "j6");
    if (a < 0 || b < 0 || c < 0 || d < 0 || e < 0 || f < 0) {
        throw std::invalid_argument("wigner6j: negative angular momentum");
    }
    if (!triangle_ok(a, b, c) || !triangle_ok(a, e, f) ||
        !triangle_ok(d, b, f) || !triangle_ok(d, e, c)) {
        return 0.0;
    }

    const long double t = std::sqrt(triangle_coeff(a, b, c) * triangle_coeff(a, e, f) *
                                    triangle_coeff(d, b, f) * triangle_coeff(d, e, c));

    const int abc = (a + b + c) / 2;
    const int aef = (a + e + f) / 2;
    const int dbf = (d + b + f) / 2;
    const int dec = (d + e + c) / 2;
    const int abde = (a + b + d + e) / 2;
    const int acdf = (a + c + d + f) / 2;
    const int bcef = (b + c + e + f) / 2;

    const int kmin = std::max({abc, aef, dbf, dec});
    const int kmax = std::min({abde, acdf, bcef});

    long double sum = 0.0L;
    for (int k = kmin; k <= kmax; ++k) {
        long double term = fact(k + 1) /
            (fact(k - abc) * fact(k - aef) * fact(k - dbf) * fact(k - dec) *
             fact(abde - k) * fact(acdf - k) * fact(bcef - k));
        sum += (k % 2 == 0) ? term : -term;
    }
    return static_cast<double>(t * sum);
}

double clebsch_gordan(double j1, double m1, double j2, double m2,
                      double j3, double m3)
{
    const int tj1 = doubled(j1, "j1"), tj3 = doubled(j3, "j3");
    const int tm3 = doubled(m3, "m3");
    (void)tj1;
    const double tjs = wigner3j(j1, j2, j3, m1, m2, -m3);
    const int phase = (doubled(j1, "j1") - doubled(j2, "j2") + tm3) / 2;
    const double sign = (((phase % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
    return sign * std::sqrt(static_cast<double>(tj3) + 1.0) * tjs;
}

} // namespace polburst::wigner
