#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsl/linalg.hpp"

namespace qsl {

/// Local dimensions d_1..d_N of a multipartite Hilbert space. Party 0 is the
/// most significant factor in the Kronecker ordering.
class SpaceDescriptor {
  public:
    SpaceDescriptor() = default;
    explicit SpaceDescriptor(std::vector<int> dims);

    std::size_t parties() const noexcept { return dims_.size(); }
    int local_dim(std::size_t j) const { return dims_.at(j); }
    const std::vector<int>& dims() const noexcept { return dims_; }
    Eigen::Index total_dim() const noexcept { return total_; }

    /// Index of party j's factor inside a full basis index.
    int digit(Eigen::Index full_index, std::size_t j) const;

    bool operator==(const SpaceDescriptor& other) const { return dims_ == other.dims_; }

  private:
    std::vector<int> dims_;
    std::vector<Eigen::Index> strides_;
    Eigen::Index total_ = 0;
};

inline constexpr double kNormTolerance = 1e-10;

/// |a_1> (x) ... (x) |a_N> with each local ket normalized.
class ProductState {
  public:
    ProductState() = default;
    /// Rejects locals whose norm deviates from 1 by more than 1e-10.
    ProductState(SpaceDescriptor space, std::vector<ComplexVector> locals);

    /// Normalizes each local ket before validating.
    static ProductState normalized(SpaceDescriptor space, std::vector<ComplexVector> locals);

    const SpaceDescriptor& space() const noexcept { return space_; }
    const std::vector<ComplexVector>& locals() const noexcept { return locals_; }
    const ComplexVector& local(std::size_t j) const { return locals_.at(j); }

  private:
    SpaceDescriptor space_;
    std::vector<ComplexVector> locals_;
};

class PureState {
  public:
    PureState() = default;
    PureState(SpaceDescriptor space, ComplexVector vector);

    static PureState normalized(SpaceDescriptor space, ComplexVector vector);

    const SpaceDescriptor& space() const noexcept { return space_; }
    const ComplexVector& vector() const noexcept { return vector_; }

  private:
    SpaceDescriptor space_;
    ComplexVector vector_;
};

/// sum_n p_n |a_{1,n},...,a_{N,n}><...|. The weights are fixed at
/// construction; closed separable evolution never changes them.
class SeparableEnsemble {
  public:
    SeparableEnsemble(std::vector<double> weights, std::vector<ProductState> members);

    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<ProductState>& members() const noexcept { return members_; }

    ComplexMatrix density() const;

  private:
    std::vector<double> weights_;
    std::vector<ProductState> members_;
};

struct EnergyStats {
    double mean = 0.0;
    double variance = 0.0;
};

PureState embed(const ProductState& product);

/// <a_1..a_{j-1}| (x) 1_j (x) <a_{j+1}..a_N| H |a_1..a_{j-1}> (x) 1_j (x) |a_{j+1}..a_N>
/// Party index j is 0-based.
HermitianOperator partial_reduction(const HermitianOperator& h, const ProductState& state, std::size_t j);

/// Same contraction for an arbitrary operator and raw local kets. The kets
/// are used as given, without a normalization check.
ComplexMatrix partial_reduction(const ComplexMatrix& m, const SpaceDescriptor& space,
                                std::span<const ComplexVector> locals, std::size_t j);

EnergyStats energy_stats(const HermitianOperator& h, const PureState& psi);
EnergyStats energy_stats(const HermitianOperator& h, const ComplexVector& psi);

/// 1 (x) .. (x) op (x) .. (x) 1 with op acting on party j.
ComplexMatrix embed_local(const ComplexMatrix& op, const SpaceDescriptor& space, std::size_t j);

/// op_1 (x) op_2 (x) ... (x) op_N
ComplexMatrix tensor_product(const std::vector<ComplexMatrix>& ops, std::size_t dim_cap = kDefaultDimCap);

/// Computational basis ket |k> of dimension d.
ComplexVector basis_ket(Eigen::Index d, Eigen::Index k);

void require_same_space(const HermitianOperator& h, const SpaceDescriptor& space, const char* what);

} // namespace qsl
