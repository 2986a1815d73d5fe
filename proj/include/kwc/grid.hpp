// grid.hpp
// Cell-centered rectangular grids (1D/2D) with zero-flux boundaries,
// staggered face gradients, and the summation-by-parts divergence that
// makes face_divergence the exact negative adjoint of face_gradient.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kwc {

class Grid {
public:
    Grid() = default;

    Grid(int dim, std::array<int, 2> shape, std::array<double, 2> spacing)
        : dim_(dim), shape_(shape), spacing_(spacing) {
        if (dim < 1 || dim > 2) throw std::invalid_argument("grid: dim must be 1 or 2");
        if (dim == 1) { shape_[1] = 1; spacing_[1] = 1.0; }
        for (int a = 0; a < dim; ++a) {
            if (shape_[a] < 2) throw std::invalid_argument("grid: every axis needs >= 2 cells");
            if (!(spacing_[a] > 0.0)) throw std::invalid_argument("grid: spacing must be positive");
        }
    }

    static Grid line(int n, double dx) { return Grid(1, {n, 1}, {dx, 1.0}); }
    static Grid box(int nx, int ny, double dx, double dy) { return Grid(2, {nx, ny}, {dx, dy}); }

    int dim() const { return dim_; }
    int extent(int axis) const { return shape_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }

    int cell_count() const { return shape_[0] * shape_[1]; }

    // measure of one cell; every interior face carries the same measure
    double cell_measure() const {
        double m = spacing_[0];
        if (dim_ == 2) m *= spacing_[1];
        return m;
    }
    double domain_measure() const { return cell_measure() * cell_count(); }

    int face_count(int axis) const {
        if (axis >= dim_) return 0;
        return axis == 0 ? (shape_[0] - 1) * shape_[1] : shape_[0] * (shape_[1] - 1);
    }

    int cell_index(int i0, int i1 = 0) const { return i0 * shape_[1] + i1; }

    // center coordinate of cell i along an axis
    double coord(int cell, int axis) const {
        int i0 = cell / shape_[1], i1 = cell % shape_[1];
        int i = axis == 0 ? i0 : i1;
        return (i + 0.5) * spacing_[axis];
    }

    bool same(const Grid& o) const {
        return dim_ == o.dim_ && shape_ == o.shape_ &&
               spacing_[0] == o.spacing_[0] && spacing_[1] == o.spacing_[1];
    }

    // Visit interior faces along `axis`; fn(face_index, cell_lo, cell_hi).
    template <class Fn>
    void for_each_face(int axis, Fn&& fn) const {
        const int n0 = shape_[0], n1 = shape_[1];
        if (axis == 0) {
            for (int i0 = 0; i0 + 1 < n0; ++i0)
                for (int i1 = 0; i1 < n1; ++i1)
                    fn(i0 * n1 + i1, i0 * n1 + i1, (i0 + 1) * n1 + i1);
        } else {
            for (int i0 = 0; i0 < n0; ++i0)
                for (int i1 = 0; i1 + 1 < n1; ++i1)
                    fn(i0 * (n1 - 1) + i1, i0 * n1 + i1, i0 * n1 + i1 + 1);
        }
    }

private:
    int dim_ = 1;
    std::array<int, 2> shape_{2, 1};
    std::array<double, 2> spacing_{1.0, 1.0};
};

struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.cell_count(), fill) {}

    double& operator[](int i) { return values[i]; }
    double operator[](int i) const { return values[i]; }
    int size() const { return static_cast<int>(values.size()); }
};

struct FieldPair {
    Field w;
    Field eta;
};

// One value per interior face, per axis. axis[1] stays empty in 1D.
struct FaceData {
    Grid grid;
    std::array<std::vector<double>, 2> axis;

    FaceData() = default;
    explicit FaceData(const Grid& g) : grid(g) {
        for (int a = 0; a < g.dim(); ++a) axis[a].assign(g.face_count(a), 0.0);
    }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!a.same(b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

inline bool all_finite(const Field& f) {
    for (double v : f.values)
        if (!std::isfinite(v)) return false;
    return true;
}

// Forward difference across each interior face divided by spacing.
// No values across the boundary (zero-flux ghost cells).
inline FaceData face_gradient(const Field& f) {
    FaceData out(f.grid);
    for (int a = 0; a < f.grid.dim(); ++a) {
        const double inv = 1.0 / f.grid.spacing(a);
        auto& q = out.axis[a];
        f.grid.for_each_face(a, [&](int fi, int lo, int hi) { q[fi] = (f[hi] - f[lo]) * inv; });
    }
    return out;
}

// Negative adjoint of face_gradient under the cell/face quadrature:
// inner(face_divergence(q), g) == -face_inner(q, face_gradient(g)) up to rounding.
inline Field face_divergence(const FaceData& q) {
    for (int a = 0; a < q.grid.dim(); ++a)
        if (static_cast<int>(q.axis[a].size()) != q.grid.face_count(a))
            throw std::invalid_argument("face_divergence: flux size mismatch");
    Field out(q.grid, 0.0);
    for (int a = 0; a < q.grid.dim(); ++a) {
        const double inv = 1.0 / q.grid.spacing(a);
        const auto& qa = q.axis[a];
        q.grid.for_each_face(a, [&](int fi, int lo, int hi) {
            out[lo] += qa[fi] * inv;
            out[hi] -= qa[fi] * inv;
        });
    }
    return out;
}

inline Field neumann_laplacian(const Field& f) { return face_divergence(face_gradient(f)); }

// Discrete L2(Omega) inner product.
inline double inner(const Field& f, const Field& g) {
    require_same_grid(f.grid, g.grid, "inner");
    double s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s * f.grid.cell_measure();
}

inline double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

inline double face_inner(const FaceData& p, const FaceData& q) {
    require_same_grid(p.grid, q.grid, "face_inner");
    double s = 0.0;
    for (int a = 0; a < p.grid.dim(); ++a)
        for (size_t i = 0; i < p.axis[a].size(); ++i) s += p.axis[a][i] * q.axis[a][i];
    return s * p.grid.cell_measure();
}

inline double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const Field& f, const Field& g) {
    double m = 0.0;
    for (int i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g[i]));
    return m;
}

// Cell-assembled squared gradient magnitude: per axis the mean of the two
// adjacent squared face differences, ghost faces contributing zero. Summed
// against cell measure this reproduces the face quadrature exactly.
inline Field cell_grad_sq(const Field& f) {
    FaceData g = face_gradient(f);
    Field out(f.grid, 0.0);
    for (int a = 0; a < f.grid.dim(); ++a) {
        const auto& qa = g.axis[a];
        f.grid.for_each_face(a, [&](int fi, int lo, int hi) {
            double half = 0.5 * qa[fi] * qa[fi];
            out[lo] += half;
            out[hi] += half;
        });
    }
    return out;
}

inline Field constant_field(const Grid& g, double v) { return Field(g, v); }

inline double field_min(const Field& f) {
    double m = f.values.empty() ? 0.0 : f.values[0];
    for (double v : f.values) m = std::min(m, v);
    return m;
}

inline double field_max(const Field& f) {
    double m = f.values.empty() ? 0.0 : f.values[0];
    for (double v : f.values) m = std::max(m, v);
    return m;
}

// |a - b|^2 in L2(Omega)^2
inline double pair_increment_sq(const FieldPair& a, const FieldPair& b) {
    require_same_grid(a.w.grid, b.w.grid, "pair_increment_sq");
    double s = 0.0;
    for (int i = 0; i < a.w.size(); ++i) {
        double dw = a.w[i] - b.w[i], de = a.eta[i] - b.eta[i];
        s += dw * dw + de * de;
    }
    return s * a.w.grid.cell_measure();
}

inline double pair_max_abs_diff(const FieldPair& a, const FieldPair& b) {
    return std::max(max_abs_diff(a.w, b.w), max_abs_diff(a.eta, b.eta));
}

}  // namespace kwc
