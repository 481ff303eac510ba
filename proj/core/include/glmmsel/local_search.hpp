#pragma once

#include <cstddef>
#include <limits>

#include "glmmsel/solver.hpp"

namespace glmmsel {

struct SwapResult {
  bool improved = false;
  Index removed = -1;   // -1 for a pure insertion
  Index inserted = -1;  // -1 for a pure removal; equal to `removed` when a block changes in place
  BlockValue value;  // inserted block; {0, 0} for a pure removal
  double before = 0.0;
  double after = 0.0;
  std::size_t candidates = 0;  // |active| * |inactive| swaps
};

/// Best single move. Single-block moves come first: a pure insertion of an
/// inactive k, or an active j re-optimized from zero (a role change or a pure
/// removal). Only when none of these improves are the (j -> k) swaps searched,
/// j active and k inactive. The inserted block alone is optimized with every
/// other coordinate fixed. Applies the best strictly improving move of the
/// first tier that has one; ties go to the first evaluated. Leaves `state`
/// unchanged otherwise.
SwapResult best_swap(FitState& state, const SolverConfig& cfg);

/// Optimal inserted block for a likelihood restricted to an inactive block,
/// with its penalty included. Returns the change of the penalized objective.
/// The random-effect search is skipped when it provably cannot reach a change
/// below `cutoff`.
struct Insertion {
  BlockValue value;
  double change = 0.0;
};
Insertion best_insertion(const BlockLikelihood& block, double lambda, double alpha,
                         double cutoff = std::numeric_limits<double>::infinity());

/// Alternates coordinate descent and best_swap until a swap round fails to
/// improve; the trace covers the whole alternation.
CdReport run_cd_ls(FitState& state, const SolverConfig& cfg, int max_rounds = 100);

FitResult fit_cd_ls(const Dataset& data, const Coefficients& init, const SolverConfig& cfg);
FitResult fit_cd_ls(const Dataset& data, const SolverConfig& cfg);

}  // namespace glmmsel
