#include "thz/pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "thz/error.hpp"
#include "thz/text.hpp"

namespace thz {

EigenResult jacobi_eigen_symmetric(std::vector<double> a, int n, double tol) {
    if (n < 1 || static_cast<int>(a.size()) != n * n) throw Error("jacobi: matrix size mismatch");

    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

    double fro = 0.0;
    for (double x : a) fro += x * x;
    fro = std::sqrt(fro);
    const double threshold = tol * (fro > 0.0 ? fro : 1.0);

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * a[static_cast<std::size_t>(i) * n + j] *
                                                 a[static_cast<std::size_t>(i) * n + j];
        return std::sqrt(s);
    };

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > threshold; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[static_cast<std::size_t>(p) * n + q];
                if (std::abs(apq) <= threshold / (static_cast<double>(n) * n)) continue;
                const double app = a[static_cast<std::size_t>(p) * n + p];
                const double aqq = a[static_cast<std::size_t>(q) * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a[static_cast<std::size_t>(k) * n + p];
                    const double akq = a[static_cast<std::size_t>(k) * n + q];
                    a[static_cast<std::size_t>(k) * n + p] = c * akp - s * akq;
                    a[static_cast<std::size_t>(k) * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[static_cast<std::size_t>(p) * n + k];
                    const double aqk = a[static_cast<std::size_t>(q) * n + k];
                    a[static_cast<std::size_t>(p) * n + k] = c * apk - s * aqk;
                    a[static_cast<std::size_t>(q) * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v[static_cast<std::size_t>(k) * n + p];
                    const double vkq = v[static_cast<std::size_t>(k) * n + q];
                    v[static_cast<std::size_t>(k) * n + p] = c * vkp - s * vkq;
                    v[static_cast<std::size_t>(k) * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    EigenResult res;
    res.values.resize(n);
    for (int i = 0; i < n; ++i) res.values[i] = a[static_cast<std::size_t>(i) * n + i];
    res.vectors = std::move(v);
    return res;
}

void RetainPolicy::validate() const {
    if (kind == Kind::Count) {
        if (count < 1) throw ConfigError("pca.retain must be >= 1");
    } else {
        if (!(fraction >= 0.95 && fraction <= 0.99))
            throw ConfigError("pca.variance must lie in [0.95, 0.99]");
    }
}

PcaDecomposition decompose(const SpectralCube& cube, const RetainPolicy& retain) {
    cube.validate();
    retain.validate();
    const int B = cube.bands;
    const std::size_t N = static_cast<std::size_t>(cube.height) * cube.width;
    if (B < 2) throw DegenerateDataError("pca: need at least 2 bands");
    if (N < 2) throw DegenerateDataError("pca: need at least 2 pixels");

    // Centered B x N matrix, one pixel spectrum per column.
    std::vector<double> mu(B, 0.0);
    for (std::size_t p = 0; p < N; ++p)
        for (int b = 0; b < B; ++b) mu[b] += cube.data[p * B + b];
    for (int b = 0; b < B; ++b) mu[b] /= static_cast<double>(N);

    std::vector<double> centered(static_cast<std::size_t>(B) * N);
    for (std::size_t p = 0; p < N; ++p)
        for (int b = 0; b < B; ++b)
            centered[static_cast<std::size_t>(b) * N + p] = cube.data[p * B + b] - mu[b];

    // Covariance C = centered * centered^T / (N - 1), B x B.
    std::vector<double> cov(static_cast<std::size_t>(B) * B, 0.0);
    const double inv_nm1 = 1.0 / static_cast<double>(N - 1);
    for (int i = 0; i < B; ++i) {
        for (int j = i; j < B; ++j) {
            double acc = 0.0;
            const double* ri = &centered[static_cast<std::size_t>(i) * N];
            const double* rj = &centered[static_cast<std::size_t>(j) * N];
            for (std::size_t p = 0; p < N; ++p) acc += ri[p] * rj[p];
            cov[static_cast<std::size_t>(i) * B + j] = acc * inv_nm1;
            cov[static_cast<std::size_t>(j) * B + i] = acc * inv_nm1;
        }
    }

    EigenResult eig = jacobi_eigen_symmetric(cov, B);

    std::vector<int> order(B);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return eig.values[x] > eig.values[y]; });

    PcaModel model;
    model.height = cube.height;
    model.width = cube.width;
    model.bands = B;
    model.df = cube.df;
    model.f_start = cube.f_start;
    model.band_means = mu;
    model.eigenvalues.resize(B);
    model.eigenvectors.assign(static_cast<std::size_t>(B) * B, 0.0);
    for (int j = 0; j < B; ++j) {
        model.eigenvalues[j] = std::max(eig.values[order[j]], 0.0);
        // Orientation: the largest-magnitude entry points positive.
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < B; ++i) {
            const double m = std::abs(eig.vectors[static_cast<std::size_t>(i) * B + order[j]]);
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        const double flip = eig.vectors[static_cast<std::size_t>(arg) * B + order[j]] < 0.0 ? -1.0 : 1.0;
        for (int i = 0; i < B; ++i)
            model.eigenvectors[static_cast<std::size_t>(i) * B + j] =
                flip * eig.vectors[static_cast<std::size_t>(i) * B + order[j]];
    }

    const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
    if (!(total > 0.0)) throw DegenerateDataError("pca: no spectral variance");
    model.explained.resize(B);
    double run = 0.0;
    for (int j = 0; j < B; ++j) {
        run += model.eigenvalues[j];
        model.explained[j] = run / total;
    }

    int r;
    if (retain.kind == RetainPolicy::Kind::Count) {
        if (retain.count > B) throw ConfigError("pca.retain exceeds the band count");
        r = retain.count;
    } else {
        r = B;
        for (int j = 0; j < B; ++j)
            if (model.explained[j] >= retain.fraction) {
                r = j + 1;
                break;
            }
    }
    model.retained = r;

    // Z = E^T * centered; row i reshaped is component image i.
    ComponentStack stack;
    stack.height = cube.height;
    stack.width = cube.width;
    stack.images.reserve(r);
    stack.offsets.resize(r);
    stack.scales.resize(r);
    for (int i = 0; i < r; ++i) {
        Image img(cube.height, cube.width);
        for (std::size_t p = 0; p < N; ++p) {
            double acc = 0.0;
            for (int b = 0; b < B; ++b)
                acc += model.eigenvectors[static_cast<std::size_t>(b) * B + i] *
                       centered[static_cast<std::size_t>(b) * N + p];
            img.data[p] = acc;
        }
        const double lo = min_value(img);
        const double hi = max_value(img);
        double scale = hi - lo;
        if (!(scale > 0.0)) scale = 1.0;  // zero-variance component stays a flat zero image
        for (double& vv : img.data) vv = (vv - lo) / scale;
        stack.offsets[i] = lo;
        stack.scales[i] = scale;
        stack.images.push_back(std::move(img));
    }

    return {std::move(model), std::move(stack)};
}

SpectralCube reconstruct(const PcaModel& model, const ComponentStack& components) {
    const int B = model.bands;
    const int r = model.retained;
    if (static_cast<int>(components.images.size()) != r)
        throw ShapeMismatchError("pca reconstruct: component count does not match the model");
    if (components.height != model.height || components.width != model.width)
        throw ShapeMismatchError("pca reconstruct: component image shape mismatch");
    const std::size_t N = static_cast<std::size_t>(model.height) * model.width;
    for (const auto& img : components.images)
        if (img.height != model.height || img.width != model.width)
            throw ShapeMismatchError("pca reconstruct: component image shape mismatch");

    SpectralCube out;
    out.height = model.height;
    out.width = model.width;
    out.bands = B;
    out.df = model.df;
    out.f_start = model.f_start;
    out.data.resize(N * B);

    std::vector<double> z(r);
    for (std::size_t p = 0; p < N; ++p) {
        for (int i = 0; i < r; ++i)
            z[i] = components.images[i].data[p] * components.scales[i] + components.offsets[i];
        for (int b = 0; b < B; ++b) {
            double acc = model.band_means[b];
            for (int i = 0; i < r; ++i)
                acc += model.eigenvectors[static_cast<std::size_t>(b) * B + i] * z[i];
            out.data[p * B + b] = static_cast<float>(acc < 0.0 ? 0.0 : acc);
        }
    }
    return out;
}

double explained_variance(const PcaModel& model, int r) {
    if (r < 1 || r > model.bands) throw Error("explained_variance: r out of range");
    const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
    if (!(total > 0.0)) throw DegenerateDataError("explained_variance: total variance is zero");
    double acc = 0.0;
    for (int i = 0; i < r; ++i) acc += model.eigenvalues[i];
    return acc / total;
}

void dump_eigen_csv(const PcaModel& model, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("pca dump: cannot open for writing: " + path);
    f << "index,eigenvalue,cumulative_fraction\n";
    for (int j = 0; j < model.bands; ++j)
        f << j << ',' << fmt_double(model.eigenvalues[j]) << ',' << fmt_double(model.explained[j]) << '\n';
    if (!f) throw IoError("pca dump: write failed: " + path);
}

}  // namespace thz
