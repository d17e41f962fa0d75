#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qnk/fields.hpp"
#include "qnk/normalize.hpp"
#include "qnk/resample.hpp"

namespace qnk {

enum class Activation { gelu, tanh, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct GainSpec {
  double alpha0 = 0.5;
  double epsilon = 1e-5;
};

struct StackSpec {
  std::size_t depth = 4;
  std::size_t width = 16;
  /// Cosine modes per axis kept by the spectral mixing.
  std::size_t modes = 6;
  std::size_t in_channels = 1;
  std::size_t dim = 2;
  NormSpec norm;
  Activation activation = Activation::gelu;
  std::uint64_t seed = 7;
  /// Residual stream z <- z + alpha0 g f(z) with a quadrature-weighted energy
  /// gain g; without it each block replaces z.
  std::optional<GainSpec> residual_gain = GainSpec{};

  void validate() const;
};

/// Frozen parameters of one mixing block.
struct Block {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  /// One width x width matrix per tensor-product cosine mode, spectral norm 0.9.
  std::vector<Eigen::MatrixXd> R;
};

struct Stack {
  StackSpec spec;
  Eigen::MatrixXd lift_W;
  Eigen::VectorXd lift_b;
  std::vector<Block> blocks;
  Eigen::MatrixXd proj1_W;
  Eigen::VectorXd proj1_b;
  Eigen::MatrixXd proj2_W;
  Eigen::VectorXd proj2_b;
};

inline constexpr std::size_t kProjectionWidth = 128;
inline constexpr double kSpectralNorm = 0.9;

/// Deterministic in spec.seed. Block l draws from its own stream, so a deeper
/// stack extends a shallower one with the same seed.
Stack build_stack(const StackSpec& spec);

/// FNV-1a hash over the little-endian bytes of every parameter.
std::uint64_t parameter_checksum(const Stack& stack);

struct ForwardResult {
  FieldTensor output;
  /// Hidden state after each block.
  std::vector<FieldTensor> hidden;
};

/// Throws DomainError when the grid is too coarse for the stack's modes.
ForwardResult forward_trace(const Stack& stack, const FieldTensor& x);
FieldTensor forward(const Stack& stack, const FieldTensor& x);

struct TransferReport {
  double h = 0.0;
  double h_prime = 0.0;
  double discrepancy = 0.0;
  /// One entry per block, then the output discrepancy (equal to `discrepancy`).
  std::vector<double> per_layer;
};

/// |G_h(x_h) - P_{h'->h} G_{h'}(x_{h'})| in the comparison norm of the h grid.
TransferReport transfer_discrepancy(const Stack& stack, const FieldSpec& field, const GridSpec& h_grid,
                                    const GridSpec& hp_grid, InterpMethod method);

/// Seed of ensemble member k derived from a base seed.
std::uint64_t member_seed(std::uint64_t base, std::size_t k);

/// Mean TransferReport over `ensemble` stacks seeded by member_seed(spec.seed, k).
TransferReport ensemble_discrepancy(const StackSpec& spec, std::size_t ensemble, const FieldSpec& field,
                                    const GridSpec& h_grid, const GridSpec& hp_grid, InterpMethod method);

struct ScalingRow {
  std::string method;
  std::size_t depth = 0;
  double ratio = 1.0;
  double h = 0.0;
  double h_prime = 0.0;
  double discrepancy = 0.0;
};

struct ScalingFit {
  std::string method;
  double slope = 0.0;
  double intercept = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::vector<ScalingFit> fits;
};

struct ExperimentConfig {
  StackSpec stack;
  std::vector<NormSpec> methods;
  std::size_t ensemble = 8;
  InterpMethod interp = InterpMethod::bicubic;
  FieldSpec field{FieldId::mixed2d, 1.0};
};

/// Discrepancy between the source grid and each target, compared on the source
/// grid. Fits log(discrepancy) = intercept + slope log(r) over targets with r > 1.
ScalingReport gap_scaling_experiment(const ExperimentConfig& cfg, std::size_t source_n,
                                     const std::vector<std::size_t>& target_ns);

/// Discrepancy against depth for fixed (h, h'). Fits the growth exponent in L.
ScalingReport depth_scaling_experiment(const ExperimentConfig& cfg, const std::vector<std::size_t>& depths,
                                       std::size_t n, std::size_t n_prime);

}  // namespace qnk
