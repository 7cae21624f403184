#pragma once

#include <span>
#include <vector>

namespace igsyn {

// Sample Pearson correlation; 0 with defined=false when either side has
// (near-)zero variance or fewer than 2 points.
struct Correlation {
    double r = 0.0;
    bool defined = false;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation (average ranks on ties).
Correlation spearman(std::span<const double> x, std::span<const double> y);

std::vector<double> ranks(std::span<const double> x);

// Regularized incomplete beta I_x(a, b) via continued fraction.
double incomplete_beta(double a, double b, double x);

// One-sided Welch t-test for H1: mean(x) > mean(y).
struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  // one-sided
};

WelchResult welch_one_sided(std::span<const double> x, std::span<const double> y);

}  // namespace igsyn
