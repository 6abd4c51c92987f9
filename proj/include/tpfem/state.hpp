#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace tpfem {

/// One period of a time-discrete trajectory: `steps` blocks of `n_dof`
/// values.  Block i holds the solution at time (i+1)*tau, so the last block
/// is both the end and (by periodicity) the state before the first step.
struct PeriodicState {
  int steps = 0;
  int n_dof = 0;
  double tau = 0;
  std::vector<double> data;

  PeriodicState() = default;
  PeriodicState(int steps_, int n_dof_, double tau_)
      : steps(steps_), n_dof(n_dof_), tau(tau_),
        data(static_cast<std::size_t>(steps_) * static_cast<std::size_t>(n_dof_), 0.0) {
    if (steps < 1) throw std::invalid_argument("periodic state: need at least one step");
    if (n_dof < 1) throw std::invalid_argument("periodic state: need at least one unknown");
    if (!(tau > 0)) throw std::invalid_argument("periodic state: step size must be positive");
  }

  double* block(int i) { return data.data() + static_cast<std::size_t>(i) * n_dof; }
  const double* block(int i) const { return data.data() + static_cast<std::size_t>(i) * n_dof; }
  std::span<double> block_span(int i) { return {block(i), static_cast<std::size_t>(n_dof)}; }
  std::span<const double> block_span(int i) const {
    return {block(i), static_cast<std::size_t>(n_dof)};
  }
};

/// Right-hand sides (or residuals) for every step of one period.
struct BlockRhs {
  int steps = 0;
  int n_dof = 0;
  std::vector<double> data;

  BlockRhs() = default;
  BlockRhs(int steps_, int n_dof_)
      : steps(steps_), n_dof(n_dof_),
        data(static_cast<std::size_t>(steps_) * static_cast<std::size_t>(n_dof_), 0.0) {
    if (steps < 1) throw std::invalid_argument("block rhs: need at least one step");
    if (n_dof < 1) throw std::invalid_argument("block rhs: need at least one unknown");
  }

  double* block(int i) { return data.data() + static_cast<std::size_t>(i) * n_dof; }
  const double* block(int i) const { return data.data() + static_cast<std::size_t>(i) * n_dof; }
};

}  // namespace tpfem
