#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscil/quadrature.hpp"
#include "oscil/system_spec.hpp"

namespace oscil {

enum class Verdict { AllOscillate, NonOscillatingExists, Inconclusive };
const char* to_string(Verdict v);

/// Outcome of the criteria decision tree with the evaluated integrals as
/// evidence.  I1/I2 are the moment integrals for components 1 and 2; Jk is
/// the nested integral with outer index k, evaluated only when the opposite
/// moment integral converged.
struct CriteriaReport {
  bool hypothesis_ok = true;
  std::vector<Violation> violations;
  std::optional<IntegralVerdict> I1, I2;
  std::optional<IntegralVerdict> J1, J2;
  Verdict verdict = Verdict::Inconclusive;
  int witness_k = 0;  ///< 1 or 2 when a branch fired, 0 otherwise
  std::string witness_branch;
};

/// Runs the decision tree, trying k = 1 then k = 2:
///   (i)   I_k and I_{3-k} both divergent            -> AllOscillate
///   (ii)  I_k divergent, I_{3-k} converged, J_k divergent -> AllOscillate
///   (iii) two-sided envelope, I_k divergent, I_{3-k} and J_k converged
///                                                   -> NonOscillatingExists
///   (iv)  otherwise                                 -> Inconclusive
/// Throws HypothesisViolation when validate_hypotheses(spec) is nonempty.
CriteriaReport classify_oscillation(const SystemSpec& spec,
                                    const QuadConfig& cfg);

}  // namespace oscil
