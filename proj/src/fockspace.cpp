#include "emq/fockspace.hpp"

#include "emq/error.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace emq {

namespace {

void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* where)
{
    if (!(a == b)) {
        throw InvalidArgument(std::string(where) + ": layout mismatch");
    }
}

Matrix kron_matrix(const Matrix& a, const Matrix& b)
{
    Matrix out = Eigen::kroneckerProduct(a, b);
    return out;
}

}  // namespace

Subsystem mode(std::string label, Index dim)
{
    return Subsystem{std::move(label), dim, SubsystemKind::bosonic};
}

Subsystem spin(std::string label)
{
    return Subsystem{std::move(label), 2, SubsystemKind::spin_half};
}

SpaceLayout::SpaceLayout(std::initializer_list<Subsystem> subsystems)
    : SpaceLayout(std::vector<Subsystem>(subsystems))
{
}

SpaceLayout::SpaceLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems))
{
    std::set<std::string> seen;
    total_dim_ = 1;
    for (const auto& s : subsystems_) {
        if (s.label.empty()) {
            throw InvalidArgument("SpaceLayout: empty subsystem label");
        }
        if (!seen.insert(s.label).second) {
            throw InvalidArgument("SpaceLayout: duplicate label '" + s.label + "'");
        }
        if (s.dim < 1) {
            throw InvalidArgument("SpaceLayout: subsystem '" + s.label + "' has nonpositive dimension");
        }
        if (s.kind == SubsystemKind::spin_half && s.dim != 2) {
            throw InvalidArgument("SpaceLayout: spin-half subsystem '" + s.label + "' must have dimension 2");
        }
        total_dim_ *= s.dim;
    }
}

bool SpaceLayout::contains(std::string_view label) const noexcept
{
    return std::any_of(subsystems_.begin(), subsystems_.end(),
                       [&](const Subsystem& s) { return s.label == label; });
}

std::size_t SpaceLayout::position(std::string_view label) const
{
    for (std::size_t i = 0; i < subsystems_.size(); ++i) {
        if (subsystems_[i].label == label) return i;
    }
    throw InvalidArgument("SpaceLayout: unknown label '" + std::string(label) + "'");
}

const Subsystem& SpaceLayout::subsystem(std::string_view label) const
{
    return subsystems_[position(label)];
}

SpaceLayout SpaceLayout::subset(std::span<const std::string> keep) const
{
    for (const auto& k : keep) position(k);
    std::vector<Subsystem> kept;
    for (const auto& s : subsystems_) {
        if (std::find(keep.begin(), keep.end(), s.label) != keep.end()) kept.push_back(s);
    }
    return SpaceLayout(std::move(kept));
}

SpaceLayout SpaceLayout::with_dim(std::string_view label, Index dim) const
{
    auto copy = subsystems_;
    copy[position(label)].dim = dim;
    return SpaceLayout(std::move(copy));
}

std::vector<Index> SpaceLayout::digits(Index flat) const
{
    std::vector<Index> out(subsystems_.size());
    for (std::size_t i = subsystems_.size(); i-- > 0;) {
        out[i] = flat % subsystems_[i].dim;
        flat /= subsystems_[i].dim;
    }
    return out;
}

Index SpaceLayout::flat_index(std::span<const Index> digits) const
{
    if (digits.size() != subsystems_.size()) {
        throw InvalidArgument("SpaceLayout::flat_index: wrong number of digits");
    }
    Index flat = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (digits[i] < 0 || digits[i] >= subsystems_[i].dim) {
            throw InvalidArgument("SpaceLayout::flat_index: digit out of range for '" +
                                  subsystems_[i].label + "'");
        }
        flat = flat * subsystems_[i].dim + digits[i];
    }
    return flat;
}

SpaceLayout concat(const SpaceLayout& first, const SpaceLayout& second)
{
    auto all = first.subsystems();
    all.insert(all.end(), second.subsystems().begin(), second.subsystems().end());
    return SpaceLayout(std::move(all));
}

// ----------------------------------------------------------------------------

double relative_hermiticity_error(const Matrix& m)
{
    const double scale = m.norm();
    if (scale == 0.0) return 0.0;
    return (m - m.adjoint()).norm() / scale;
}

FockOperator::FockOperator(SpaceLayout layout, Matrix matrix)
    : FockOperator(std::move(layout), std::move(matrix), false)
{
}

FockOperator::FockOperator(SpaceLayout layout, Matrix matrix, bool hermitian)
    : layout_(std::move(layout)), matrix_(std::move(matrix)), hermitian_(hermitian)
{
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() != layout_.total_dim()) {
        throw InvalidArgument("FockOperator: matrix dimension does not match layout");
    }
}

FockOperator FockOperator::hermitian(SpaceLayout layout, Matrix matrix)
{
    if (relative_hermiticity_error(matrix) > 1e-12) {
        throw InvalidArgument("FockOperator::hermitian: matrix is not hermitian");
    }
    return FockOperator(std::move(layout), std::move(matrix), true);
}

bool FockOperator::is_hermitian(double rel_tol) const
{
    return relative_hermiticity_error(matrix_) <= rel_tol;
}

FockOperator FockOperator::adjoint() const
{
    return FockOperator(layout_, matrix_.adjoint(), hermitian_);
}

FockOperator operator+(const FockOperator& lhs, const FockOperator& rhs)
{
    require_same_layout(lhs.layout_, rhs.layout_, "operator+");
    return FockOperator(lhs.layout_, lhs.matrix_ + rhs.matrix_, lhs.hermitian_ && rhs.hermitian_);
}

FockOperator operator-(const FockOperator& lhs, const FockOperator& rhs)
{
    require_same_layout(lhs.layout_, rhs.layout_, "operator-");
    return FockOperator(lhs.layout_, lhs.matrix_ - rhs.matrix_, lhs.hermitian_ && rhs.hermitian_);
}

FockOperator operator*(const FockOperator& lhs, const FockOperator& rhs)
{
    require_same_layout(lhs.layout_, rhs.layout_, "operator*");
    return FockOperator(lhs.layout_, lhs.matrix_ * rhs.matrix_, false);
}

FockOperator operator*(double scale, const FockOperator& op)
{
    return FockOperator(op.layout_, scale * op.matrix_, op.hermitian_);
}

FockOperator operator*(Complex scale, const FockOperator& op)
{
    return FockOperator(op.layout_, scale * op.matrix_, op.hermitian_ && scale.imag() == 0.0);
}

FockOperator commutator(const FockOperator& lhs, const FockOperator& rhs)
{
    return lhs * rhs - rhs * lhs;
}

FockOperator identity(const SpaceLayout& layout)
{
    const Index n = layout.total_dim();
    return FockOperator::hermitian(layout, Matrix::Identity(n, n));
}

FockOperator zero(const SpaceLayout& layout)
{
    const Index n = layout.total_dim();
    return FockOperator::hermitian(layout, Matrix::Zero(n, n));
}

FockOperator kron(const FockOperator& first, const FockOperator& second)
{
    auto m = kron_matrix(first.matrix(), second.matrix());
    auto layout = concat(first.layout(), second.layout());
    if (first.tagged_hermitian() && second.tagged_hermitian()) {
        return FockOperator::hermitian(std::move(layout), std::move(m));
    }
    return FockOperator(std::move(layout), std::move(m));
}

FockOperator annihilation(Index dim)
{
    if (dim < 2) throw InvalidArgument("annihilation: dimension must be >= 2");
    Matrix m = Matrix::Zero(dim, dim);
    for (Index n = 1; n < dim; ++n) {
        m(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return FockOperator(SpaceLayout{mode("mode", dim)}, std::move(m));
}

FockOperator creation(Index dim)
{
    return annihilation(dim).adjoint();
}

FockOperator number(Index dim)
{
    if (dim < 2) throw InvalidArgument("number: dimension must be >= 2");
    Matrix m = Matrix::Zero(dim, dim);
    for (Index n = 0; n < dim; ++n) m(n, n) = static_cast<double>(n);
    return FockOperator::hermitian(SpaceLayout{mode("mode", dim)}, std::move(m));
}

FockOperator pauli(Axis axis)
{
    Matrix m(2, 2);
    switch (axis) {
    case Axis::x:
        m << 0.0, 1.0, 1.0, 0.0;
        break;
    case Axis::y:
        m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
        break;
    case Axis::z:
        m << 1.0, 0.0, 0.0, -1.0;
        break;
    }
    return FockOperator::hermitian(SpaceLayout{spin("spin")}, std::move(m));
}

FockOperator dressed_ladder(Sign sign)
{
    const Complex i(0.0, 1.0);
    const Complex s = sign == Sign::plus ? i : -i;
    return pauli(Axis::z) + s * pauli(Axis::y);
}

FockOperator embed(const FockOperator& op, const SpaceLayout& layout, std::string_view target)
{
    const auto pos = layout.position(target);
    const auto& subs = layout.subsystems();
    if (op.dim() != subs[pos].dim) {
        throw InvalidArgument("embed: operator dimension does not match subsystem '" +
                              std::string(target) + "'");
    }
    Index left = 1;
    Index right = 1;
    for (std::size_t i = 0; i < pos; ++i) left *= subs[i].dim;
    for (std::size_t i = pos + 1; i < subs.size(); ++i) right *= subs[i].dim;

    Matrix m = kron_matrix(kron_matrix(Matrix::Identity(left, left), op.matrix()),
                           Matrix::Identity(right, right));
    if (op.tagged_hermitian()) return FockOperator::hermitian(layout, std::move(m));
    return FockOperator(layout, std::move(m));
}

FockOperator annihilation(const SpaceLayout& layout, std::string_view label)
{
    return embed(annihilation(layout.subsystem(label).dim), layout, label);
}

FockOperator creation(const SpaceLayout& layout, std::string_view label)
{
    return embed(creation(layout.subsystem(label).dim), layout, label);
}

FockOperator number(const SpaceLayout& layout, std::string_view label)
{
    return embed(number(layout.subsystem(label).dim), layout, label);
}

FockOperator pauli(const SpaceLayout& layout, std::string_view label, Axis axis)
{
    return embed(pauli(axis), layout, label);
}

// ----------------------------------------------------------------------------

StateVector::StateVector(SpaceLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes))
{
    if (amplitudes_.size() != layout_.total_dim()) {
        throw InvalidArgument("StateVector: amplitude count does not match layout");
    }
    if (std::abs(amplitudes_.norm() - 1.0) > 1e-10) {
        throw InvalidArgument("StateVector: state is not normalized");
    }
}

StateVector StateVector::normalized(SpaceLayout layout, Vector amplitudes)
{
    const double n = amplitudes.norm();
    if (n == 0.0) throw InvalidArgument("StateVector::normalized: zero vector");
    return StateVector(std::move(layout), amplitudes / n);
}

StateVector StateVector::basis(SpaceLayout layout, std::span<const Index> digits)
{
    Vector v = Vector::Zero(layout.total_dim());
    v(layout.flat_index(digits)) = 1.0;
    return StateVector(std::move(layout), std::move(v));
}

StateVector tensor(const StateVector& first, const StateVector& second)
{
    Vector v = Eigen::kroneckerProduct(first.amplitudes(), second.amplitudes());
    return StateVector::normalized(concat(first.layout(), second.layout()), std::move(v));
}

// ----------------------------------------------------------------------------

DensityMatrix::DensityMatrix(SpaceLayout layout, Matrix matrix, DensityTolerance tol)
    : layout_(std::move(layout)), matrix_(std::move(matrix))
{
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() != layout_.total_dim()) {
        throw InvalidArgument("DensityMatrix: matrix dimension does not match layout");
    }
    const Complex tr = matrix_.trace();
    if (std::abs(tr - 1.0) > tol.trace) {
        throw NumericalError("DensityMatrix: trace deviates from 1 by " +
                             std::to_string(std::abs(tr - 1.0)));
    }
    if (relative_hermiticity_error(matrix_) > tol.hermiticity) {
        throw NumericalError("DensityMatrix: matrix is not hermitian");
    }
    const double lowest = min_eigenvalue();
    if (lowest < -tol.positivity) {
        throw NumericalError("DensityMatrix: negative eigenvalue " + std::to_string(lowest));
    }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi)
{
    return DensityMatrix(psi.layout(), psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(const SpaceLayout& layout)
{
    const Index n = layout.total_dim();
    return DensityMatrix(layout, Matrix::Identity(n, n) / static_cast<double>(n));
}

DensityMatrix DensityMatrix::thermal(const Subsystem& mode_info, double nbar)
{
    if (mode_info.kind != SubsystemKind::bosonic) {
        throw InvalidArgument("DensityMatrix::thermal: subsystem is not bosonic");
    }
    if (!(nbar >= 0.0)) throw InvalidArgument("DensityMatrix::thermal: negative occupation");
    const Index dim = mode_info.dim;
    Matrix m = Matrix::Zero(dim, dim);
    const double q = nbar / (1.0 + nbar);
    double p = 1.0;
    double total = 0.0;
    for (Index n = 0; n < dim; ++n) {
        m(n, n) = p;
        total += p;
        p *= q;
    }
    m /= total;
    return DensityMatrix(SpaceLayout{mode_info}, std::move(m));
}

double DensityMatrix::purity() const
{
    return (matrix_ * matrix_).trace().real();
}

double DensityMatrix::min_eigenvalue() const
{
    const Matrix herm = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double DensityMatrix::expectation(const FockOperator& op) const
{
    require_same_layout(layout_, op.layout(), "DensityMatrix::expectation");
    // tr(rho A) = sum_ij rho_ij A_ji
    return (matrix_.transpose().cwiseProduct(op.matrix())).sum().real();
}

DensityMatrix tensor(const DensityMatrix& first, const DensityMatrix& second)
{
    return DensityMatrix(concat(first.layout(), second.layout()),
                         kron_matrix(first.matrix(), second.matrix()));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep)
{
    if (keep.empty()) throw InvalidArgument("partial_trace: keep set is empty");
    const auto& layout = rho.layout();
    const SpaceLayout kept = layout.subset(keep);

    std::vector<bool> is_kept(layout.size(), false);
    for (const auto& k : keep) is_kept[layout.position(k)] = true;

    // Split each full index into (kept index, traced index).
    const Index full = layout.total_dim();
    const Index dk = kept.total_dim();
    const Index dt = full / dk;
    std::vector<Index> kept_of(full), traced_of(full);
    for (Index i = 0; i < full; ++i) {
        const auto d = layout.digits(i);
        Index k = 0;
        Index t = 0;
        for (std::size_t s = 0; s < d.size(); ++s) {
            const Index n = layout.subsystems()[s].dim;
            if (is_kept[s]) {
                k = k * n + d[s];
            } else {
                t = t * n + d[s];
            }
        }
        kept_of[i] = k;
        traced_of[i] = t;
    }
    std::vector<Index> compose(dk * dt);
    for (Index i = 0; i < full; ++i) compose[kept_of[i] * dt + traced_of[i]] = i;

    Matrix out = Matrix::Zero(dk, dk);
    const Matrix& m = rho.matrix();
    for (Index i = 0; i < full; ++i) {
        const Index ki = kept_of[i];
        const Index ti = traced_of[i];
        for (Index kc = 0; kc < dk; ++kc) {
            out(ki, kc) += m(i, compose[kc * dt + ti]);
        }
    }
    return DensityMatrix(kept, std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::string> keep)
{
    const std::vector<std::string> v(keep);
    return partial_trace(rho, std::span<const std::string>(v));
}

double fidelity(const DensityMatrix& rho, const StateVector& psi)
{
    require_same_layout(rho.layout(), psi.layout(), "fidelity");
    const Complex f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
    return std::clamp(f.real(), 0.0, 1.0);
}

std::vector<double> populations(const DensityMatrix& rho, std::string_view label)
{
    const auto& layout = rho.layout();
    const auto pos = layout.position(label);
    std::vector<double> pops(static_cast<std::size_t>(layout.subsystems()[pos].dim), 0.0);
    for (Index i = 0; i < layout.total_dim(); ++i) {
        const auto d = layout.digits(i);
        pops[static_cast<std::size_t>(d[pos])] += rho.matrix()(i, i).real();
    }
    return pops;
}

double top_level_population(const DensityMatrix& rho)
{
    double worst = 0.0;
    for (const auto& s : rho.layout().subsystems()) {
        if (s.kind != SubsystemKind::bosonic) continue;
        const auto pops = populations(rho, s.label);
        double top = pops.back();
        if (pops.size() >= 2) top += pops[pops.size() - 2];
        worst = std::max(worst, top);
    }
    return worst;
}

void check_truncation(const DensityMatrix& rho, double threshold)
{
    for (const auto& s : rho.layout().subsystems()) {
        if (s.kind != SubsystemKind::bosonic) continue;
        const auto pops = populations(rho, s.label);
        double top = pops.back();
        if (pops.size() >= 2) top += pops[pops.size() - 2];
        if (top > threshold) {
            throw TruncationError("truncation overflow on mode '" + s.label + "': top-level population " +
                                  std::to_string(top) + " exceeds " + std::to_string(threshold));
        }
    }
}

}  // namespace emq
