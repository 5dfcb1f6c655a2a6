#pragma once

#include <string>
#include <vector>

#include "thz/cube.hpp"
#include "thz/image.hpp"

namespace thz {

// Eigendecomposition of a symmetric matrix (row-major, n x n) by cyclic
// Jacobi rotations, swept until every off-diagonal magnitude falls below
// tol * frobenius_norm. Returns unsorted (eigenvalues, column eigenvectors).
struct EigenResult {
    std::vector<double> values;
    std::vector<double> vectors;  // column j = eigenvector of values[j]
};
EigenResult jacobi_eigen_symmetric(std::vector<double> matrix, int n, double tol = 1e-12);

// Retention policy: a fixed component count, or the smallest count whose
// cumulative eigenvalue fraction reaches a target in [0.95, 0.99].
struct RetainPolicy {
    enum class Kind { Count, VarianceFraction };
    Kind kind = Kind::Count;
    int count = 5;
    double fraction = 0.97;

    void validate() const;
};

// Per-band PCA model of a cube: means over pixels, sorted eigenpairs of the
// B x B pixel covariance, and the retained count. Orientation: each
// eigenvector's largest-magnitude entry is positive.
struct PcaModel {
    int height = 0;
    int width = 0;
    int bands = 0;
    double df = 0.0;
    double f_start = 0.0;
    std::vector<double> band_means;     // length B
    std::vector<double> eigenvalues;    // length B, nonincreasing, clamped >= 0
    std::vector<double> eigenvectors;   // B x B, column j = eigenvector j
    std::vector<double> explained;      // cumulative eigenvalue fractions
    int retained = 0;
};

// Retained component images (rows of Z reshaped to H x W), min-max normalized
// to [0, 1] with the affine (offset, scale) recorded per component.
struct ComponentStack {
    int height = 0;
    int width = 0;
    std::vector<Image> images;
    std::vector<double> offsets;
    std::vector<double> scales;
};

struct PcaDecomposition {
    PcaModel model;
    ComponentStack components;
};

PcaDecomposition decompose(const SpectralCube& cube, const RetainPolicy& retain);

// Inverse: denormalize the components, project back through the retained
// eigenvectors, re-add the band means, clamp at zero.
SpectralCube reconstruct(const PcaModel& model, const ComponentStack& components);

double explained_variance(const PcaModel& model, int r);

// Eigenvalue spectrum CSV: `index,eigenvalue,cumulative_fraction`.
void dump_eigen_csv(const PcaModel& model, const std::string& path);

}  // namespace thz
