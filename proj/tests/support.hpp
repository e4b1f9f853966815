#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "oamspdc/analysis.hpp"

// Shared helpers for the test suites. These are oracles: they must stay
// independent of the library's implementation path.

namespace testsupport {

// Composite-Simpson integral of f over [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// Planar integral of a rotationally-symmetric |field|^2 profile:
// 2 pi * Integral g(r) r dr over [0, r_max].
inline double radial_plane_integral(const std::function<double(double)>& g, double r_max,
                                    int n = 4096) {
    return 2.0 * 3.14159265358979323846 *
           simpson([&g](double r) { return g(r) * r; }, 0.0, r_max, n);
}

// Argmax of f over [a, b] by dense scan with the given step.
inline double scan_argmax(const std::function<double(double)>& f, double a, double b,
                          double step) {
    double best_x = a, best = f(a);
    for (double x = a + step; x <= b; x += step) {
        const double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    return best_x;
}

// Upper-tail p-value of a chi-square statistic by the Wilson-Hilferty
// normal approximation; plenty for pass/fail thresholds around p = 0.01.
inline double chi2_pvalue(double stat, int dof) {
    if (dof <= 0) return 1.0;
    const double d = static_cast<double>(dof);
    const double z = (std::cbrt(stat / d) - (1.0 - 2.0 / (9.0 * d))) /
                     std::sqrt(2.0 / (9.0 * d));
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

struct Region {
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    double mass = 0.0;
    std::size_t cells = 0;
};

// Connected components (4-neighborhood) of map cells strictly above the
// threshold, with mass-weighted centroids.
inline std::vector<Region> regions_above(const oamspdc::MapGrid& map, double threshold) {
    const std::size_t nx = map.nx(), ny = map.ny();
    std::vector<int> label(nx * ny, -1);
    std::vector<Region> regions;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < nx * ny; ++start) {
        if (label[start] >= 0 || !(map.v[start] > threshold)) continue;
        const int id = static_cast<int>(regions.size());
        regions.push_back({});
        stack.push_back(start);
        label[start] = id;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            const std::size_t ix = cur % nx, iy = cur / nx;
            Region& r = regions[id];
            r.centroid_x += map.v[cur] * map.x[ix];
            r.centroid_y += map.v[cur] * map.y[iy];
            r.mass += map.v[cur];
            r.cells += 1;
            const long nbr[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
            for (const auto& d : nbr) {
                const long jx = static_cast<long>(ix) + d[0];
                const long jy = static_cast<long>(iy) + d[1];
                if (jx < 0 || jy < 0 || jx >= static_cast<long>(nx) ||
                    jy >= static_cast<long>(ny))
                    continue;
                const std::size_t n = static_cast<std::size_t>(jy) * nx + jx;
                if (label[n] < 0 && map.v[n] > threshold) {
                    label[n] = id;
                    stack.push_back(n);
                }
            }
        }
    }
    for (auto& r : regions) {
        if (r.mass > 0.0) {
            r.centroid_x /= r.mass;
            r.centroid_y /= r.mass;
        }
    }
    return regions;
}

} // namespace testsupport
