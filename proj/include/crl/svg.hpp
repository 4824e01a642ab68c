#pragma once

#include "crl/gridworld.hpp"
#include "crl/mdp.hpp"

#include <string>
#include <vector>

namespace crl {

struct PolicyMapAnnotations {
    std::string title;
    std::vector<Cell> outlined;  // drawn with a blue border
};

/// Arrow map of a greedy gridworld policy. Cells are shaded by reward
/// (green above the default, red below); "nothing" draws no arrow.
std::string policy_svg(const GridworldSpec& grid, const std::vector<int>& actions,
                       const PolicyMapAnnotations& annotations = {});
/// Same, taking the argmax of `policy` with the given tie tolerance.
std::string policy_svg(const GridworldSpec& grid, const TabularPolicy& policy,
                       const PolicyMapAnnotations& annotations = {}, double tie_tolerance = 1e-9);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
};

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins, double lo, double hi);

std::string histogram_svg(const std::vector<HistogramBin>& bins, double marker, const std::string& title,
                          const std::string& xlabel);

struct CurvePoint {
    double x = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

std::string curve_svg(const std::vector<CurvePoint>& points, bool log_x, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel);

/// Scatter of (x, y) pairs over [0,1]^2 with the diagonal drawn in.
std::string scatter_svg(const std::vector<std::pair<double, double>>& points, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel);

}  // namespace crl
