#include "igsyn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "igsyn/contract.hpp"

namespace igsyn {

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    IGSYN_REQUIRE(x.size() == y.size(), "correlation length mismatch");
    std::size_t n = x.size();
    if (n < 2) return {0.0, false};
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx < 1e-24 || syy < 1e-24) return {0.0, false};
    return {sxy / std::sqrt(sxx * syy), true};
}

std::vector<double> ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size(), 0.0);
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
    IGSYN_REQUIRE(x.size() == y.size(), "correlation length mismatch");
    std::vector<double> rx = ranks(x);
    std::vector<double> ry = ranks(y);
    return pearson(rx, ry);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    IGSYN_REQUIRE(a > 0.0 && b > 0.0, "incomplete_beta requires a, b > 0");
    IGSYN_REQUIRE(x >= 0.0 && x <= 1.0, "incomplete_beta requires x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                   a * std::log(x) + b * std::log(1.0 - x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * betacf(a, b, x) / a;
    }
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

WelchResult welch_one_sided(std::span<const double> x, std::span<const double> y) {
    IGSYN_REQUIRE(x.size() >= 2 && y.size() >= 2,
                  "welch test needs >= 2 samples per side");
    auto mean_var = [](std::span<const double> v) {
        double m = 0.0;
        for (double a : v) m += a;
        m /= static_cast<double>(v.size());
        double s2 = 0.0;
        for (double a : v) s2 += (a - m) * (a - m);
        s2 /= static_cast<double>(v.size() - 1);
        return std::pair<double, double>{m, s2};
    };
    auto [mx, vx] = mean_var(x);
    auto [my, vy] = mean_var(y);
    double nx = static_cast<double>(x.size());
    double ny = static_cast<double>(y.size());
    double se2 = vx / nx + vy / ny;
    WelchResult res;
    if (se2 < 1e-300) {
        // Degenerate: identical constants on both sides.
        res.t = 0.0;
        res.df = nx + ny - 2.0;
        res.p = mx > my ? 0.0 : 1.0;
        if (mx == my) res.p = 0.5;
        return res;
    }
    res.t = (mx - my) / std::sqrt(se2);
    double num = se2 * se2;
    double den = (vx / nx) * (vx / nx) / (nx - 1.0) + (vy / ny) * (vy / ny) / (ny - 1.0);
    res.df = num / den;
    // Student-t survival function via the incomplete beta.
    double xbeta = res.df / (res.df + res.t * res.t);
    double tail = 0.5 * incomplete_beta(res.df / 2.0, 0.5, xbeta);
    res.p = res.t >= 0.0 ? tail : 1.0 - tail;
    return res;
}

}  // namespace igsyn
