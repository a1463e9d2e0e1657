#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "resonette/approximation.hpp"
#include "resonette/distortion.hpp"
#include "resonette/grushin.hpp"
#include "resonette/ladder.hpp"
#include "resonette/operator.hpp"
#include "resonette/spectrum.hpp"

namespace resonette {

// Columns x, re_vmu, im_vmu, v, diff with diff = |V^mu(x) - V(x)|.
void write_approximation_csv(std::ostream& os, const SectorFunction& vmu, const PotentialSpec& v,
                             const std::vector<double>& x);

// Columns r, b, db, d2b.
void write_profile_csv(std::ostream& os, const DistortionProfile& p, const std::vector<double>& r);

// <stem>.bin holds the matrix column-major as interleaved little-endian (re, im) doubles;
// <stem>.json carries size, grid and meta.
void write_operator_dump(const std::string& stem, const DiscretizedOperator& op);
DiscretizedOperator read_operator_dump(const std::string& stem);

// JSON array of {re, im, multiplicity, residual, h, mu, theta}.
std::string resonance_table_json(const ResonanceSet& set);
void write_resonance_csv(std::ostream& os, const ResonanceSet& set);

// Samples: z_re, z_im, log_abs_d, arg_d, norm_emp.
void write_determinant_csv(std::ostream& os, const DeterminantTrace& trace);
// Boxes: re_min, re_max, im_min, im_max, winding, poles, zeros, samples, retries, ok.
void write_box_counts_csv(std::ostream& os, const std::vector<BoxCount>& boxes);

// {rungs, limit_set, crosschecks}; crosscheck may be null.
std::string ladder_report_json(const LadderResult& result, const CrosscheckReport* crosscheck = nullptr);
// One row per (entry, rung): entry, rung, re, im, movement, tag.
void write_chain_csv(std::ostream& os, const LadderResult& result);

}  // namespace resonette
