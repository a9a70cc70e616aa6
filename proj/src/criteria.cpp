#include "oscil/criteria.hpp"

#include <sstream>

namespace oscil {

const char* to_string(Violation v) {
  switch (v) {
    case Violation::Lambda1NotPositive: return "Lambda1NotPositive";
    case Violation::Lambda2NotPositive: return "Lambda2NotPositive";
    case Violation::LambdaProductNotGreaterThanOne:
      return "LambdaProductNotGreaterThanOne";
    case Violation::OrderLessThanOne: return "OrderLessThanOne";
    case Violation::NegativeCoefficient: return "NegativeCoefficient";
    case Violation::EnvelopeConstantLessThanOne:
      return "EnvelopeConstantLessThanOne";
  }
  return "UnknownViolation";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::AllOscillate: return "AllOscillate";
    case Verdict::NonOscillatingExists: return "NonOscillatingExists";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "UnknownVerdict";
}

std::vector<Violation> validate_hypotheses(const SystemSpec& spec) {
  std::vector<Violation> out;
  if (spec.n1 < 1 || spec.n2 < 1) out.push_back(Violation::OrderLessThanOne);
  if (!(spec.lambda1 > 0.0)) out.push_back(Violation::Lambda1NotPositive);
  if (!(spec.lambda2 > 0.0)) out.push_back(Violation::Lambda2NotPositive);
  if (!(spec.lambda1 * spec.lambda2 > 1.0))
    out.push_back(Violation::LambdaProductNotGreaterThanOne);
  bool negative = false;
  for (const CoefFn* a : {&spec.a1, &spec.a2})
    for (const CoefTerm& t : a->terms()) negative |= t.c < 0.0;
  if (negative) out.push_back(Violation::NegativeCoefficient);
  if (spec.envelope == Envelope::TwoSidedExactPowerLaw && !(spec.M >= 1.0))
    out.push_back(Violation::EnvelopeConstantLessThanOne);
  return out;
}

namespace {

// One arm of the decision tree for a fixed k.  `Ik` must be divergent and
// `Iother` converged on entry.  Fills Jk and resolves branch (ii)/(iii)/(iv).
void resolve_nested_branch(const SystemSpec& spec, const QuadConfig& cfg,
                           int k, const CoefFn& ak, int nk, double lambda_k,
                           const CoefFn& a_other, int n_other,
                           std::optional<IntegralVerdict>& Jk,
                           CriteriaReport& rep) {
  Jk = nested_criterion_integral(ak, nk, a_other, n_other, lambda_k, cfg);
  std::ostringstream branch;
  branch << "k=" << k << ": moment integral divergent, counterpart convergent, ";
  if (Jk->is_divergent()) {
    rep.verdict = Verdict::AllOscillate;
    rep.witness_k = k;
    branch << "nested integral divergent";
  } else if (spec.envelope == Envelope::TwoSidedExactPowerLaw) {
    rep.verdict = Verdict::NonOscillatingExists;
    rep.witness_k = k;
    branch << "nested integral convergent under the two-sided envelope; "
              "a non-oscillating solution is constructible";
  } else {
    rep.verdict = Verdict::Inconclusive;
    branch << "nested integral convergent but the envelope is one-sided";
  }
  rep.witness_branch = branch.str();
}

}  // namespace

CriteriaReport classify_oscillation(const SystemSpec& spec,
                                    const QuadConfig& cfg) {
  {
    std::vector<Violation> bad = validate_hypotheses(spec);
    if (!bad.empty()) {
      std::string msg = "classify_oscillation: hypotheses violated:";
      for (Violation v : bad) msg += std::string(" ") + to_string(v);
      throw HypothesisViolation(msg);
    }
  }
  cfg.validate();

  CriteriaReport rep;
  rep.I1 = moment_integral(spec.a1, spec.n1, cfg);
  rep.I2 = moment_integral(spec.a2, spec.n2, cfg);

  const bool d1 = rep.I1->is_divergent();
  const bool d2 = rep.I2->is_divergent();

  if (d1 && d2) {
    rep.verdict = Verdict::AllOscillate;
    rep.witness_k = 1;  // deterministic tie-break: report k = 1's trace
    rep.witness_branch = "k=1: moment integrals of both components divergent";
    return rep;
  }
  if (d1) {
    resolve_nested_branch(spec, cfg, 1, spec.a1, spec.n1, spec.lambda1,
                          spec.a2, spec.n2, rep.J1, rep);
    return rep;
  }
  if (d2) {
    resolve_nested_branch(spec, cfg, 2, spec.a2, spec.n2, spec.lambda2,
                          spec.a1, spec.n1, rep.J2, rep);
    return rep;
  }
  rep.verdict = Verdict::Inconclusive;
  rep.witness_branch =
      "no branch: neither moment integral diverges, so the divergence "
      "hypothesis holds for no k";
  return rep;
}

}  // namespace oscil
