// fockspace.hpp - truncated Fock-space and spin-1/2 operator algebra
//
// Every composite space is described by a SpaceLayout: an ordered list of
// labelled subsystems. Tensor products follow declaration order, so the
// first subsystem is the most significant digit of a basis index.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

enum class SubsystemKind { bosonic, spin_half };

struct Subsystem {
    std::string label;
    Index dim = 0;
    SubsystemKind kind = SubsystemKind::bosonic;

    bool operator==(const Subsystem&) const = default;
};

/// Bosonic mode truncated to `dim` Fock levels.
Subsystem mode(std::string label, Index dim);
/// Spin-1/2, basis {|up>, |down>} so that sigma_z = diag(1, -1).
Subsystem spin(std::string label);

class SpaceLayout {
public:
    SpaceLayout() = default;
    SpaceLayout(std::initializer_list<Subsystem> subsystems);
    explicit SpaceLayout(std::vector<Subsystem> subsystems);

    const std::vector<Subsystem>& subsystems() const noexcept { return subsystems_; }
    std::size_t size() const noexcept { return subsystems_.size(); }
    bool empty() const noexcept { return subsystems_.empty(); }
    Index total_dim() const noexcept { return total_dim_; }

    bool contains(std::string_view label) const noexcept;
    std::size_t position(std::string_view label) const;
    const Subsystem& subsystem(std::string_view label) const;

    /// Sub-layout holding `keep` in this layout's declaration order.
    SpaceLayout subset(std::span<const std::string> keep) const;
    /// Copy with one subsystem's truncation changed.
    SpaceLayout with_dim(std::string_view label, Index dim) const;

    /// Per-subsystem occupation digits of a flat basis index.
    std::vector<Index> digits(Index flat) const;
    Index flat_index(std::span<const Index> digits) const;

    bool operator==(const SpaceLayout& other) const { return subsystems_ == other.subsystems_; }

private:
    std::vector<Subsystem> subsystems_;
    Index total_dim_ = 1;
};

SpaceLayout concat(const SpaceLayout& first, const SpaceLayout& second);

class FockOperator {
public:
    FockOperator(SpaceLayout layout, Matrix matrix);

    /// Tags the operator hermitian after checking A = A^dag to 1e-12 relative norm.
    static FockOperator hermitian(SpaceLayout layout, Matrix matrix);

    const SpaceLayout& layout() const noexcept { return layout_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }
    bool tagged_hermitian() const noexcept { return hermitian_; }
    bool is_hermitian(double rel_tol = 1e-12) const;

    FockOperator adjoint() const;

    friend FockOperator operator+(const FockOperator& lhs, const FockOperator& rhs);
    friend FockOperator operator-(const FockOperator& lhs, const FockOperator& rhs);
    friend FockOperator operator*(const FockOperator& lhs, const FockOperator& rhs);
    friend FockOperator operator*(double scale, const FockOperator& op);
    friend FockOperator operator*(Complex scale, const FockOperator& op);

private:
    FockOperator(SpaceLayout layout, Matrix matrix, bool hermitian);

    SpaceLayout layout_;
    Matrix matrix_;
    bool hermitian_ = false;
};

FockOperator commutator(const FockOperator& lhs, const FockOperator& rhs);
FockOperator identity(const SpaceLayout& layout);
FockOperator zero(const SpaceLayout& layout);
FockOperator kron(const FockOperator& first, const FockOperator& second);

/// Ladder operator with <n-1|a|n> = sqrt(n). Single-mode layout labelled "mode".
FockOperator annihilation(Index dim);
FockOperator creation(Index dim);
FockOperator number(Index dim);

enum class Axis { x, y, z };
enum class Sign { plus, minus };

/// Standard 2x2 Pauli matrix on a single spin labelled "spin".
FockOperator pauli(Axis axis);

/// Dressed-qubit ladder sigma_z +/- i sigma_y. The qubit lives on sigma_x
/// eigenstates: sigma_z + i sigma_y = 2 |-x><+x|, so these carry norm 2.
FockOperator dressed_ladder(Sign sign);
inline constexpr double kDressedLadderNorm = 2.0;

/// Identity on every subsystem except `target`, where `op` acts.
FockOperator embed(const FockOperator& op, const SpaceLayout& layout, std::string_view target);

// Shorthands for embedded single-subsystem operators.
FockOperator annihilation(const SpaceLayout& layout, std::string_view label);
FockOperator creation(const SpaceLayout& layout, std::string_view label);
FockOperator number(const SpaceLayout& layout, std::string_view label);
FockOperator pauli(const SpaceLayout& layout, std::string_view label, Axis axis);

class StateVector {
public:
    StateVector(SpaceLayout layout, Vector amplitudes);

    /// Normalizes `amplitudes`; throws on a zero vector.
    static StateVector normalized(SpaceLayout layout, Vector amplitudes);
    /// Product Fock/spin basis state with one occupation digit per subsystem.
    static StateVector basis(SpaceLayout layout, std::span<const Index> digits);

    const SpaceLayout& layout() const noexcept { return layout_; }
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    Index dim() const noexcept { return amplitudes_.size(); }

private:
    SpaceLayout layout_;
    Vector amplitudes_;
};

StateVector tensor(const StateVector& first, const StateVector& second);

struct DensityTolerance {
    double trace = 1e-9;
    double hermiticity = 1e-10;
    double positivity = 1e-9;
};

class DensityMatrix {
public:
    DensityMatrix(SpaceLayout layout, Matrix matrix, DensityTolerance tol = {});

    static DensityMatrix pure(const StateVector& psi);
    static DensityMatrix maximally_mixed(const SpaceLayout& layout);
    /// Bose-Einstein populations q^n (1-q), q = nbar/(1+nbar), renormalized on the truncation.
    static DensityMatrix thermal(const Subsystem& mode, double nbar);

    const SpaceLayout& layout() const noexcept { return layout_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }

    double purity() const;
    double min_eigenvalue() const;
    /// Re tr(rho A).
    double expectation(const FockOperator& op) const;

private:
    SpaceLayout layout_;
    Matrix matrix_;
};

DensityMatrix tensor(const DensityMatrix& first, const DensityMatrix& second);

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep);

/// <psi|rho|psi>.
double fidelity(const DensityMatrix& rho, const StateVector& psi);

/// Reduced Fock populations of one subsystem.
std::vector<double> populations(const DensityMatrix& rho, std::string_view label);

/// Summed population of the top two levels of every bosonic mode; the maximum is returned.
double top_level_population(const DensityMatrix& rho);

/// Throws TruncationError when any bosonic mode holds more than `threshold`
/// in its top two Fock levels.
void check_truncation(const DensityMatrix& rho, double threshold = 1e-6);

double relative_hermiticity_error(const Matrix& m);

}  // namespace emq
