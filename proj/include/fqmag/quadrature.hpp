#ifndef FQMAG_QUADRATURE_HPP
#define FQMAG_QUADRATURE_HPP

#include <fqmag/errors.hpp>
#include <fqmag/spin.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace fqmag {

struct Orientation {
    double polar;
    double azimuth;
};

/// Nodes on the unit sphere with positive weights summing to one.
class OrientationGrid {
public:
    OrientationGrid(std::vector<Orientation> nodes, std::vector<double> weights)
        : nodes_(std::move(nodes)), weights_(std::move(weights)) {
        if (nodes_.empty() || nodes_.size() != weights_.size())
            throw DomainError("orientation grid needs one weight per node");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w > 0.0))
                throw DomainError("orientation weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw DomainError("orientation weights must sum to 1, got " + std::to_string(total));
    }

    /// One node carrying all the weight; exact for isotropic systems.
    static OrientationGrid single(double polar = 0.0, double azimuth = 0.0) {
        return OrientationGrid({{polar, azimuth}}, {1.0});
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    const std::vector<Orientation>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    Vec3 direction(std::size_t i) const { return unit_vector(nodes_[i].polar, nodes_[i].azimuth); }

    template <class F>
    double integrate(F&& f) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            sum += weights_[i] * f(nodes_[i]);
        return sum;
    }

private:
    std::vector<Orientation> nodes_;
    std::vector<double> weights_;
};

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 1)
        throw DomainError("Gauss-Legendre order must be >= 1");
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1)
        x[n / 2] = 0.0;
    return {x, w};
}

/// Product grid: Gauss-Legendre in cos(polar) times uniform azimuth.
inline OrientationGrid make_orientation_grid(int n_polar, int n_azimuth) {
    if (n_polar < 2 || n_azimuth < 4)
        throw DomainError("orientation grid needs n_polar >= 2 and n_azimuth >= 4, got (" +
                          std::to_string(n_polar) + ", " + std::to_string(n_azimuth) + ")");
    const auto [x, w] = gauss_legendre(n_polar);
    std::vector<Orientation> nodes;
    std::vector<double> weights;
    nodes.reserve(static_cast<std::size_t>(n_polar) * n_azimuth);
    weights.reserve(nodes.capacity());
    double wsum = 0.0;
    for (double wi : w)
        wsum += wi;
    for (int i = 0; i < n_polar; ++i) {
        const double polar = std::acos(x[i]);
        for (int j = 0; j < n_azimuth; ++j) {
            nodes.push_back({polar, 2.0 * std::numbers::pi * j / n_azimuth});
            weights.push_back(w[i] / wsum / n_azimuth);
        }
    }
    return {std::move(nodes), std::move(weights)};
}

}  // namespace fqmag

#endif  // FQMAG_QUADRATURE_HPP
