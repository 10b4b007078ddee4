#pragma once

#include <array>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <vector>

// Exact complex linear algebra for a single neutron carrying a spin-1/2 and a
// two-beam path degree of freedom.
//
// Basis convention, shared by every module in this project:
//
//     index = 2*spin + path      spin: up = 0, down = 1     path: I = 0, II = 1
//
// so the four basis kets are ordered |up,I>, |up,II>, |down,I>, |down,II>.
// Tensor products always place the spin factor first.

namespace contextsim::qcore {

using Complex = std::complex<double>;

// Structural identities (operator algebra, trace normalization) must hold to
// the rounding error of 4x4 double arithmetic; numerically derived quantities
// get an order of magnitude of slack.
inline constexpr double kStructuralTol = 1e-12;
inline constexpr double kDerivedTol = 1e-10;

// Eigenvalues of a density matrix may dip this far below zero before the
// matrix is rejected as non-positive.
inline constexpr double kPsdTol = 1e-10;

struct NotAnInvolutionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a measurement branch with (numerically) zero probability would
// have to be renormalized.
struct DegenerateBranchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InternalConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense square complex matrix of dimension 2 or 4 with value semantics.
// Storage is a flat row-major array; copies are cheap and intended.
class ComplexMatrix {
  public:
    explicit ComplexMatrix(int dim);

    static ComplexMatrix identity(int dim);
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

    int dim() const { return dim_; }

    const Complex& operator()(int row, int col) const { return m_[row * dim_ + col]; }
    Complex& operator()(int row, int col) { return m_[row * dim_ + col]; }

    ComplexMatrix adjoint() const;
    Complex trace() const;

    ComplexMatrix& operator+=(const ComplexMatrix& rhs);
    ComplexMatrix& operator-=(const ComplexMatrix& rhs);
    ComplexMatrix& operator*=(Complex scalar);

    bool is_hermitian(double tol) const;
    bool is_unitary(double tol) const;
    bool is_involution(double tol) const;  // squares to the identity

  private:
    int dim_;
    std::array<Complex, 16> m_{};
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(Complex scalar, ComplexMatrix m);

// Chebyshev (max entry) distance; the metric used for every matrix comparison.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol);

const ComplexMatrix& identity2();
const ComplexMatrix& identity4();
const ComplexMatrix& pauli_x();
const ComplexMatrix& pauli_y();
const ComplexMatrix& pauli_z();

// Kronecker product, spin factor x path factor -> 4x4.
ComplexMatrix tensor(const ComplexMatrix& spin_factor, const ComplexMatrix& path_factor);

bool commutes(const ComplexMatrix& a, const ComplexMatrix& b, double tol = kStructuralTol);

// Eigenprojectors (1 +- o)/2 of a Hermitian involution; rejects anything whose
// square is not the identity.
struct ProjectorPair {
    ComplexMatrix plus;
    ComplexMatrix minus;
};
ProjectorPair eigenprojectors(const ComplexMatrix& o);

// Eigenvalues of a Hermitian matrix, ascending.  Uses a cyclic Jacobi sweep on
// the real symmetric embedding [[X, -Y], [Y, X]]; plenty for dimension <= 4.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double norm() const;
};

Vec3 normalized(const Vec3& v);

// n . sigma for a unit Bloch vector n (2x2, Hermitian, involutory).
ComplexMatrix bloch(const Vec3& direction);

class StateVector {
  public:
    // Requires the amplitudes to be normalized already (within 1e-12).
    static StateVector from_amplitudes(const std::array<Complex, 4>& amps);
    // Normalizes; rejects (numerically) zero vectors.
    static StateVector normalized(const std::array<Complex, 4>& amps);

    const Complex& amplitude(int i) const { return amp_[i]; }
    const std::array<Complex, 4>& amplitudes() const { return amp_; }
    double norm() const;

    // Multiplies by a global phase so the first amplitude with |a| > tol is
    // real and positive.  Pins an otherwise arbitrary convention.
    StateVector phase_fixed(double tol = 1e-9) const;

  private:
    StateVector() = default;
    std::array<Complex, 4> amp_{};
};

Complex inner(const StateVector& a, const StateVector& b);
bool approx_equal(const StateVector& a, const StateVector& b, double tol);

// |ket><bra|
ComplexMatrix outer(const StateVector& ket, const StateVector& bra);

// Validated 4x4 density operator: Hermitian and unit trace within 1e-12,
// eigenvalues >= -1e-10.
class DensityMatrix {
  public:
    static DensityMatrix from_matrix(const ComplexMatrix& m);
    static DensityMatrix pure(const StateVector& psi);
    static DensityMatrix maximally_mixed();
    // Skips the eigenvalue check.  For internal updates that preserve
    // positivity by construction (unitary conjugation, projection chains).
    static DensityMatrix trusted(const ComplexMatrix& m);

    const ComplexMatrix& matrix() const { return m_; }

    // Re tr(rho o); the imaginary part is discarded (zero for Hermitian o).
    double expectation(const ComplexMatrix& o) const;

  private:
    explicit DensityMatrix(const ComplexMatrix& m) : m_(m) {}
    ComplexMatrix m_;
};

}  // namespace contextsim::qcore
