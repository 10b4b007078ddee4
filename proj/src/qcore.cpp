#include "contextsim/qcore.hpp"

#include <algorithm>
#include <cmath>

namespace contextsim::qcore {

namespace {

void require_dim(int dim) {
    if (dim != 2 && dim != 4) {
        throw std::invalid_argument("matrix dimension must be 2 or 4");
    }
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("matrix dimension mismatch");
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(int dim) : dim_(dim) {
    require_dim(dim);
}

ComplexMatrix ComplexMatrix::identity(int dim) {
    ComplexMatrix m(dim);
    for (int i = 0; i < dim; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

ComplexMatrix ComplexMatrix::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    const int dim = static_cast<int>(rows.size());
    ComplexMatrix m(dim);
    int r = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != dim) {
            throw std::invalid_argument("matrix rows must all have the same length");
        }
        int c = 0;
        for (const Complex& v : row) {
            m(r, c++) = v;
        }
        ++r;
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(dim_);
    for (int r = 0; r < dim_; ++r) {
        for (int c = 0; c < dim_; ++c) {
            out(c, r) = std::conj((*this)(r, c));
        }
    }
    return out;
}

Complex ComplexMatrix::trace() const {
    Complex t = 0.0;
    for (int i = 0; i < dim_; ++i) {
        t += (*this)(i, i);
    }
    return t;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
    require_same_dim(*this, rhs);
    for (int i = 0; i < dim_ * dim_; ++i) {
        m_[i] += rhs.m_[i];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
    require_same_dim(*this, rhs);
    for (int i = 0; i < dim_ * dim_; ++i) {
        m_[i] -= rhs.m_[i];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scalar) {
    for (int i = 0; i < dim_ * dim_; ++i) {
        m_[i] *= scalar;
    }
    return *this;
}

bool ComplexMatrix::is_hermitian(double tol) const {
    return max_abs_diff(*this, adjoint()) <= tol;
}

bool ComplexMatrix::is_unitary(double tol) const {
    return max_abs_diff(adjoint() * (*this), identity(dim_)) <= tol;
}

bool ComplexMatrix::is_involution(double tol) const {
    return max_abs_diff((*this) * (*this), identity(dim_)) <= tol;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) {
    lhs += rhs;
    return lhs;
}

ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) {
    lhs -= rhs;
    return lhs;
}

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    require_same_dim(lhs, rhs);
    const int n = lhs.dim();
    ComplexMatrix out(n);
    for (int r = 0; r < n; ++r) {
        for (int k = 0; k < n; ++k) {
            const Complex v = lhs(r, k);
            if (v == Complex(0.0)) {
                continue;
            }
            for (int c = 0; c < n; ++c) {
                out(r, c) += v * rhs(k, c);
            }
        }
    }
    return out;
}

ComplexMatrix operator*(Complex scalar, ComplexMatrix m) {
    m *= scalar;
    return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_dim(a, b);
    double worst = 0.0;
    for (int r = 0; r < a.dim(); ++r) {
        for (int c = 0; c < a.dim(); ++c) {
            worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
        }
    }
    return worst;
}

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    return max_abs_diff(a, b) <= tol;
}

const ComplexMatrix& identity2() {
    static const ComplexMatrix m = ComplexMatrix::identity(2);
    return m;
}

const ComplexMatrix& identity4() {
    static const ComplexMatrix m = ComplexMatrix::identity(4);
    return m;
}

const ComplexMatrix& pauli_x() {
    static const ComplexMatrix m = ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    return m;
}

const ComplexMatrix& pauli_y() {
    static const ComplexMatrix m =
        ComplexMatrix::from_rows({{0.0, Complex(0.0, -1.0)}, {Complex(0.0, 1.0), 0.0}});
    return m;
}

const ComplexMatrix& pauli_z() {
    static const ComplexMatrix m = ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
    return m;
}

ComplexMatrix tensor(const ComplexMatrix& spin_factor, const ComplexMatrix& path_factor) {
    if (spin_factor.dim() != 2 || path_factor.dim() != 2) {
        throw std::invalid_argument("tensor expects two 2x2 factors");
    }
    ComplexMatrix out(4);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                for (int l = 0; l < 2; ++l) {
                    out(2 * i + k, 2 * j + l) = spin_factor(i, j) * path_factor(k, l);
                }
            }
        }
    }
    return out;
}

bool commutes(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    require_same_dim(a, b);
    return max_abs_diff(a * b, b * a) <= tol;
}

ProjectorPair eigenprojectors(const ComplexMatrix& o) {
    if (!o.is_hermitian(kDerivedTol) || !o.is_involution(kDerivedTol)) {
        throw NotAnInvolutionError("observable must be Hermitian and square to the identity");
    }
    const ComplexMatrix& id = (o.dim() == 2) ? identity2() : identity4();
    ProjectorPair p{Complex(0.5) * (id + o), Complex(0.5) * (id - o)};
    return p;
}

namespace {

// Cyclic Jacobi on a real symmetric matrix, in place.  Small fixed sizes only.
void jacobi_diagonalize(std::vector<double>& a, int n) {
    auto at = [&](int r, int c) -> double& { return a[r * n + c]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                off += at(p, q) * at(p, q);
            }
        }
        if (off < 1e-30) {
            return;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-300) {
                    continue;
                }
                const double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
}

}  // namespace

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
    if (!m.is_hermitian(kDerivedTol)) {
        throw std::invalid_argument("hermitian_eigenvalues expects a Hermitian matrix");
    }
    const int d = m.dim();
    const int n = 2 * d;
    // Real embedding [[X, -Y], [Y, X]] has the same spectrum, each eigenvalue twice.
    std::vector<double> a(n * n, 0.0);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            const double x = m(r, c).real();
            const double y = m(r, c).imag();
            a[r * n + c] = x;
            a[(r + d) * n + (c + d)] = x;
            a[r * n + (c + d)] = -y;
            a[(r + d) * n + c] = y;
        }
    }
    jacobi_diagonalize(a, n);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) {
        diag[i] = a[i * n + i];
    }
    std::sort(diag.begin(), diag.end());
    std::vector<double> out(d);
    for (int i = 0; i < d; ++i) {
        out[i] = diag[2 * i];  // collapse the exact doubling of the embedding
    }
    return out;
}

double Vec3::norm() const {
    return std::sqrt(x * x + y * y + z * z);
}

Vec3 normalized(const Vec3& v) {
    const double n = v.norm();
    if (n < 1e-12) {
        throw std::invalid_argument("cannot normalize a zero vector");
    }
    return Vec3{v.x / n, v.y / n, v.z / n};
}

ComplexMatrix bloch(const Vec3& direction) {
    if (std::abs(direction.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("bloch direction must be a unit vector");
    }
    ComplexMatrix m(2);
    m(0, 0) = direction.z;
    m(1, 1) = -direction.z;
    m(0, 1) = Complex(direction.x, -direction.y);
    m(1, 0) = Complex(direction.x, direction.y);
    return m;
}

StateVector StateVector::from_amplitudes(const std::array<Complex, 4>& amps) {
    StateVector s;
    s.amp_ = amps;
    if (std::abs(s.norm() - 1.0) > kStructuralTol) {
        throw std::invalid_argument("state vector must be normalized");
    }
    return s;
}

StateVector StateVector::normalized(const std::array<Complex, 4>& amps) {
    double n2 = 0.0;
    for (const Complex& a : amps) {
        n2 += std::norm(a);
    }
    if (n2 < 1e-24) {
        throw DegenerateBranchError("cannot normalize a zero state vector");
    }
    const double inv = 1.0 / std::sqrt(n2);
    StateVector s;
    for (int i = 0; i < 4; ++i) {
        s.amp_[i] = amps[i] * inv;
    }
    return s;
}

double StateVector::norm() const {
    double n2 = 0.0;
    for (const Complex& a : amp_) {
        n2 += std::norm(a);
    }
    return std::sqrt(n2);
}

StateVector StateVector::phase_fixed(double tol) const {
    for (const Complex& a : amp_) {
        if (std::abs(a) > tol) {
            const Complex phase = std::conj(a) / std::abs(a);
            StateVector s;
            for (int i = 0; i < 4; ++i) {
                s.amp_[i] = amp_[i] * phase;
            }
            return s;
        }
    }
    return *this;
}

Complex inner(const StateVector& a, const StateVector& b) {
    Complex v = 0.0;
    for (int i = 0; i < 4; ++i) {
        v += std::conj(a.amplitude(i)) * b.amplitude(i);
    }
    return v;
}

bool approx_equal(const StateVector& a, const StateVector& b, double tol) {
    for (int i = 0; i < 4; ++i) {
        if (std::abs(a.amplitude(i) - b.amplitude(i)) > tol) {
            return false;
        }
    }
    return true;
}

ComplexMatrix outer(const StateVector& ket, const StateVector& bra) {
    ComplexMatrix m(4);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            m(r, c) = ket.amplitude(r) * std::conj(bra.amplitude(c));
        }
    }
    return m;
}

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix& m) {
    if (m.dim() != 4) {
        throw std::invalid_argument("density matrix must be 4x4");
    }
    if (!m.is_hermitian(kStructuralTol)) {
        throw std::invalid_argument("density matrix must be Hermitian");
    }
    if (std::abs(m.trace() - Complex(1.0)) > kStructuralTol) {
        throw std::invalid_argument("density matrix must have unit trace");
    }
    const std::vector<double> evs = hermitian_eigenvalues(m);
    if (evs.front() < -kPsdTol) {
        throw std::invalid_argument("density matrix must be positive semidefinite");
    }
    return DensityMatrix(m);
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    return DensityMatrix(outer(psi, psi));
}

DensityMatrix DensityMatrix::maximally_mixed() {
    return DensityMatrix(Complex(0.25) * ComplexMatrix::identity(4));
}

DensityMatrix DensityMatrix::trusted(const ComplexMatrix& m) {
    return DensityMatrix(m);
}

double DensityMatrix::expectation(const ComplexMatrix& o) const {
    return (m_ * o).trace().real();
}

}  // namespace contextsim::qcore
