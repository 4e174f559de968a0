#pragma once

// Frozen reference values produced by tests/oracles/oracle_values.py (mpmath/scipy).

namespace oracle {

inline constexpr double kInvGamma075 = 0.81604893909826298;
inline constexpr double kKernelMass075Rho2T10 = 0.59460355703400895;
inline constexpr double kGammaP075At10 = 0.9999796330464971;
inline constexpr double kFirstCellWeight = 0.18545356674668447;
inline constexpr double kBeta025_05 = 5.2441151085842396;
inline constexpr double kPhiH075Lam0Gap1 = 0.32775719428651498;
inline constexpr double kPhiH07Lam1Gap01 = 0.39159333012280277;
inline constexpr double kPhiH07Lam1Gap1 = -0.10477450603024855;
inline constexpr double kPhiH06Lam2Gap05 = -0.24073909634519855;
inline constexpr double kVarB1H07Lam1 = 0.3518817690550011;
inline constexpr double kConvVarBaselineT05 = 0.12119673048619191;
inline constexpr double kConvVarBaselineT1 = 0.12077065605014748;
inline constexpr double kConvVarBaselineT2 = 0.12054527266957486;
inline constexpr double kConvVarRho1T1 = 0.25467006803141819;
inline constexpr double kWeightedSum20Alpha075 = 0.62483701151493796;
inline constexpr double kDiscreteMsqT05 = 0.11198454165444088;
inline constexpr double kDiscreteMsqT1 = 0.10193579637859397;
inline constexpr double kDiscreteMsqT2 = 0.10172188377456032;
inline constexpr double kDiscreteMsqT4 = 0.10172132163338049;
inline constexpr double kIncrementCovC0 = 0.0003480417083409439;
inline constexpr double kIncrementCovC1 = 0.00010538677480761744;
inline constexpr double kIncrementCovC7 = 2.261179102925343e-05;

}  // namespace oracle
