#include "qsl/spaces.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "qsl/errors.hpp"

namespace qsl {

namespace {

constexpr double kReductionHermitianTol = 1e-11;

} // namespace

SpaceDescriptor::SpaceDescriptor(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw DimensionError("SpaceDescriptor: at least one party required");
    strides_.assign(dims_.size(), 1);
    total_ = 1;
    for (std::size_t j = dims_.size(); j-- > 0;) {
        if (dims_[j] < 2) {
            throw DimensionError("SpaceDescriptor: local dimension of party " + std::to_string(j) +
                                 " must be >= 2, got " + std::to_string(dims_[j]));
        }
        strides_[j] = total_;
        if (total_ > static_cast<Eigen::Index>(kDefaultDimCap) / dims_[j]) {
            throw DimensionError("SpaceDescriptor: total dimension exceeds cap " + std::to_string(kDefaultDimCap));
        }
        total_ *= dims_[j];
    }
}

int SpaceDescriptor::digit(Eigen::Index full_index, std::size_t j) const {
    return static_cast<int>((full_index / strides_.at(j)) % dims_[j]);
}

ProductState::ProductState(SpaceDescriptor space, std::vector<ComplexVector> locals)
    : space_(std::move(space)), locals_(std::move(locals)) {
    if (locals_.size() != space_.parties()) {
        throw DimensionError("ProductState: expected " + std::to_string(space_.parties()) + " local kets, got " +
                             std::to_string(locals_.size()));
    }
    for (std::size_t j = 0; j < locals_.size(); ++j) {
        if (locals_[j].size() != space_.local_dim(j)) {
            throw DimensionError("ProductState: local ket " + std::to_string(j) + " has dimension " +
                                 std::to_string(locals_[j].size()) + ", expected " +
                                 std::to_string(space_.local_dim(j)));
        }
        const double norm_sq = locals_[j].squaredNorm();
        if (!(std::abs(norm_sq - 1.0) <= kNormTolerance)) {
            std::ostringstream os;
            os << "ProductState: local ket " << j << " has <a|a> = " << norm_sq;
            throw NormalizationError(os.str());
        }
    }
}

ProductState ProductState::normalized(SpaceDescriptor space, std::vector<ComplexVector> locals) {
    for (auto& a : locals) {
        const double n = a.norm();
        if (n == 0.0 || !std::isfinite(n)) throw NormalizationError("ProductState: zero or non-finite local ket");
        a /= n;
    }
    return ProductState(std::move(space), std::move(locals));
}

PureState::PureState(SpaceDescriptor space, ComplexVector vector)
    : space_(std::move(space)), vector_(std::move(vector)) {
    if (vector_.size() != space_.total_dim()) {
        throw DimensionError("PureState: vector has dimension " + std::to_string(vector_.size()) + ", expected " +
                             std::to_string(space_.total_dim()));
    }
    const double norm_sq = vector_.squaredNorm();
    if (!(std::abs(norm_sq - 1.0) <= kNormTolerance)) {
        std::ostringstream os;
        os << "PureState: <psi|psi> = " << norm_sq;
        throw NormalizationError(os.str());
    }
}

PureState PureState::normalized(SpaceDescriptor space, ComplexVector vector) {
    const double n = vector.norm();
    if (n == 0.0 || !std::isfinite(n)) throw NormalizationError("PureState: zero or non-finite vector");
    vector /= n;
    return PureState(std::move(space), std::move(vector));
}

SeparableEnsemble::SeparableEnsemble(std::vector<double> weights, std::vector<ProductState> members)
    : weights_(std::move(weights)), members_(std::move(members)) {
    if (weights_.size() != members_.size() || weights_.empty()) {
        throw DimensionError("SeparableEnsemble: need one weight per member");
    }
    double total = 0.0;
    for (double p : weights_) {
        if (!(p >= 0.0)) throw std::invalid_argument("SeparableEnsemble: negative weight");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("SeparableEnsemble: weights must sum to 1");
    for (const auto& m : members_) {
        if (!(m.space() == members_.front().space())) throw DimensionError("SeparableEnsemble: mixed spaces");
    }
}

ComplexMatrix SeparableEnsemble::density() const {
    const Eigen::Index dim = members_.front().space().total_dim();
    ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
    for (std::size_t n = 0; n < members_.size(); ++n) {
        const ComplexVector v = embed(members_[n]).vector();
        rho += weights_[n] * v * v.adjoint();
    }
    return rho;
}

PureState embed(const ProductState& product) {
    ComplexVector v = product.local(0);
    for (std::size_t j = 1; j < product.locals().size(); ++j) v = kron(v, product.local(j));
    return PureState::normalized(product.space(), std::move(v));
}

ComplexMatrix partial_reduction(const ComplexMatrix& m, const SpaceDescriptor& space,
                                std::span<const ComplexVector> locals, std::size_t j) {
    if (locals.size() != space.parties()) throw DimensionError("partial_reduction: wrong number of local kets");
    if (j >= space.parties()) {
        throw std::out_of_range("partial_reduction: party index " + std::to_string(j) + " out of range");
    }
    const Eigen::Index dim = space.total_dim();
    if (m.rows() != dim || m.cols() != dim) throw DimensionError("partial_reduction: operator/space mismatch");

    // weight(i) = prod_{k != j} a_k[digit_k(i)], local(i) = digit_j(i)
    ComplexVector weight(dim);
    std::vector<int> local(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) {
        Complex w = 1.0;
        for (std::size_t k = 0; k < space.parties(); ++k) {
            const int d = space.digit(i, k);
            if (k == j) {
                local[static_cast<std::size_t>(i)] = d;
            } else {
                w *= locals[k](d);
            }
        }
        weight(i) = w;
    }

    const int dj = space.local_dim(j);
    ComplexMatrix out = ComplexMatrix::Zero(dj, dj);
    for (Eigen::Index c = 0; c < dim; ++c) {
        const Complex wc = weight(c);
        if (wc == 0.0) continue;
        const int lc = local[static_cast<std::size_t>(c)];
        for (Eigen::Index r = 0; r < dim; ++r) {
            const Complex entry = m(r, c);
            if (entry == 0.0) continue;
            out(local[static_cast<std::size_t>(r)], lc) += std::conj(weight(r)) * entry * wc;
        }
    }
    return out;
}

HermitianOperator partial_reduction(const HermitianOperator& h, const ProductState& state, std::size_t j) {
    return HermitianOperator(partial_reduction(h.matrix(), state.space(), state.locals(), j), kReductionHermitianTol);
}

EnergyStats energy_stats(const HermitianOperator& h, const ComplexVector& psi) {
    if (psi.size() != h.dim()) throw DimensionError("energy_stats: state/operator dimension mismatch");
    const ComplexVector hpsi = h.matrix() * psi;
    EnergyStats s;
    s.mean = psi.dot(hpsi).real();
    // <psi|(H - E)^2|psi> = ||(H - E) psi||^2, nonnegative by construction
    s.variance = (hpsi - s.mean * psi).squaredNorm();
    return s;
}

EnergyStats energy_stats(const HermitianOperator& h, const PureState& psi) {
    return energy_stats(h, psi.vector());
}

ComplexMatrix embed_local(const ComplexMatrix& op, const SpaceDescriptor& space, std::size_t j) {
    if (j >= space.parties()) throw std::out_of_range("embed_local: party index out of range");
    if (op.rows() != space.local_dim(j) || op.cols() != space.local_dim(j)) {
        throw DimensionError("embed_local: operator does not match local dimension of party " + std::to_string(j));
    }
    std::vector<ComplexMatrix> ops;
    ops.reserve(space.parties());
    for (std::size_t k = 0; k < space.parties(); ++k) {
        ops.push_back(k == j ? op : ComplexMatrix::Identity(space.local_dim(k), space.local_dim(k)));
    }
    return tensor_product(ops);
}

ComplexMatrix tensor_product(const std::vector<ComplexMatrix>& ops, std::size_t dim_cap) {
    if (ops.empty()) throw DimensionError("tensor_product: no factors");
    ComplexMatrix out = ops.front();
    for (std::size_t k = 1; k < ops.size(); ++k) out = kron(out, ops[k], dim_cap);
    return out;
}

ComplexVector basis_ket(Eigen::Index d, Eigen::Index k) {
    if (k < 0 || k >= d) throw std::out_of_range("basis_ket: index out of range");
    ComplexVector v = ComplexVector::Zero(d);
    v(k) = 1.0;
    return v;
}

void require_same_space(const HermitianOperator& h, const SpaceDescriptor& space, const char* what) {
    if (h.dim() != space.total_dim()) {
        throw DimensionError(std::string(what) + ": operator dimension " + std::to_string(h.dim()) +
                             " does not match space dimension " + std::to_string(space.total_dim()));
    }
}

} // namespace qsl
