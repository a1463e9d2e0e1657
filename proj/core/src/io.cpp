#include "resonette/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "resonette/errors.hpp"

namespace resonette {

using nlohmann::json;

namespace {

std::ostream& precise(std::ostream& os) { return os << std::setprecision(17); }

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::string kind_name(OperatorKind k) {
    switch (k) {
        case OperatorKind::distorted: return "distorted";
        case OperatorKind::reference: return "reference";
        case OperatorKind::free: return "free";
    }
    return "distorted";
}

OperatorKind kind_from(const std::string& s) {
    if (s == "reference") return OperatorKind::reference;
    if (s == "free") return OperatorKind::free;
    if (s == "distorted") return OperatorKind::distorted;
    throw ValidationError("unknown operator kind '" + s + "'");
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

json property_json(const PropertyPInstance& p) {
    json outside = json::array();
    for (const auto& z : p.outside_i) outside.push_back(complex_json(z));
    return json{{"mu_tilde", p.mu_tilde},
                {"mu", p.mu},
                {"I", interval_json(p.i)},
                {"J", interval_json(p.j)},
                {"count", p.count},
                {"separation", p.separation},
                {"literal_threshold", p.literal_threshold},
                {"diagnostic_threshold", p.diagnostic_threshold},
                {"containment", p.verdict.containment},
                {"count_ok", p.verdict.count},
                {"holds_literal", p.verdict.holds_literal()},
                {"holds_diagnostic", p.verdict.holds_diagnostic()},
                {"outside_I", outside}};
}

json resonance_array(const ResonanceSet& set) {
    json arr = json::array();
    for (const auto& e : set.entries)
        arr.push_back(json{{"re", e.value.real()},
                           {"im", e.value.imag()},
                           {"multiplicity", e.multiplicity},
                           {"residual", e.residual},
                           {"h", set.h},
                           {"mu", set.mu},
                           {"theta", set.theta}});
    return arr;
}

}  // namespace

void write_approximation_csv(std::ostream& os, const SectorFunction& vmu, const PotentialSpec& v,
                             const std::vector<double>& x) {
    precise(os) << "x,re_vmu,im_vmu,v,diff\n";
    for (double xi : x) {
        const cplx w = vmu.eval_sector(cplx(std::abs(xi), 0.0), xi < 0 ? -1 : 1);
        const double ref = v.eval(xi);
        os << xi << ',' << w.real() << ',' << w.imag() << ',' << ref << ',' << std::abs(w - ref) << '\n';
    }
}

void write_profile_csv(std::ostream& os, const DistortionProfile& p, const std::vector<double>& r) {
    precise(os) << "r,b,db,d2b\n";
    for (double ri : r) os << ri << ',' << p.b(ri) << ',' << p.b_deriv(1, ri) << ',' << p.b_deriv(2, ri) << '\n';
}

void write_operator_dump(const std::string& stem, const DiscretizedOperator& op) {
    static_assert(std::endian::native == std::endian::little, "dump layout assumes a little-endian host");
    std::ofstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw ValidationError("cannot open " + stem + ".bin for writing");
    bin.write(reinterpret_cast<const char*>(op.matrix.data()),
              static_cast<std::streamsize>(op.matrix.size() * sizeof(cplx)));

    const json side{{"rows", op.matrix.rows()},
                    {"cols", op.matrix.cols()},
                    {"layout", "column-major complex128 (re, im) little-endian"},
                    {"grid",
                     {{"geometry", to_string(op.grid.geometry)},
                      {"x_min", op.grid.x_min},
                      {"x_max", op.grid.x_max},
                      {"n_points", op.grid.n_points},
                      {"scheme", op.grid.scheme},
                      {"dimension", op.grid.dimension},
                      {"spacing", op.grid.spacing()}}},
                    {"meta",
                     {{"h", op.meta.h},
                      {"mu", op.meta.mu},
                      {"theta", op.meta.theta},
                      {"kind", kind_name(op.meta.kind)},
                      {"form", op.meta.form == DistortionForm::plain ? "plain" : "symmetric"},
                      {"absorber_rank", op.absorber_rank()},
                      {"warnings", op.meta.warnings}}},
                    {"fingerprint", grid_fingerprint(op.grid)}};
    std::ofstream js(stem + ".json");
    if (!js) throw ValidationError("cannot open " + stem + ".json for writing");
    js << std::setw(2) << side << '\n';
}

DiscretizedOperator read_operator_dump(const std::string& stem) {
    std::ifstream js(stem + ".json");
    if (!js) throw ValidationError("cannot open " + stem + ".json");
    json side;
    try {
        side = json::parse(js);
    } catch (const json::exception& e) {
        throw ValidationError(stem + ".json: " + e.what());
    }
    DiscretizedOperator op;
    try {
        const auto& g = side.at("grid");
        op.grid.geometry = geometry_from_string(g.at("geometry").get<std::string>());
        op.grid.x_min = g.at("x_min").get<double>();
        op.grid.x_max = g.at("x_max").get<double>();
        op.grid.n_points = g.at("n_points").get<int>();
        op.grid.scheme = g.at("scheme").get<int>();
        op.grid.dimension = g.at("dimension").get<int>();
        const auto& m = side.at("meta");
        op.meta.h = m.at("h").get<double>();
        op.meta.mu = m.at("mu").get<double>();
        op.meta.theta = m.at("theta").get<double>();
        op.meta.kind = kind_from(m.at("kind").get<std::string>());
        op.meta.form = m.at("form").get<std::string>() == "symmetric" ? DistortionForm::symmetric : DistortionForm::plain;
        op.meta.warnings = m.at("warnings").get<std::vector<std::string>>();
        const auto rows = side.at("rows").get<Eigen::Index>();
        const auto cols = side.at("cols").get<Eigen::Index>();
        op.matrix.resize(rows, cols);
    } catch (const json::exception& e) {
        throw ValidationError(stem + ".json: " + e.what());
    }
    std::ifstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw ValidationError("cannot open " + stem + ".bin");
    const auto bytes = static_cast<std::streamsize>(op.matrix.size() * sizeof(cplx));
    bin.read(reinterpret_cast<char*>(op.matrix.data()), bytes);
    if (bin.gcount() != bytes) throw ValidationError(stem + ".bin is shorter than its sidecar says");
    return op;
}

std::string resonance_table_json(const ResonanceSet& set) { return resonance_array(set).dump(2); }

void write_resonance_csv(std::ostream& os, const ResonanceSet& set) {
    precise(os) << "re,im,multiplicity,residual,h,mu,theta\n";
    for (const auto& e : set.entries)
        os << e.value.real() << ',' << e.value.imag() << ',' << e.multiplicity << ',' << e.residual << ',' << set.h << ','
           << set.mu << ',' << set.theta << '\n';
}

void write_determinant_csv(std::ostream& os, const DeterminantTrace& trace) {
    precise(os) << "z_re,z_im,log_abs_d,arg_d,norm_emp\n";
    for (const auto& s : trace.samples)
        os << s.z.real() << ',' << s.z.imag() << ',' << s.log_abs << ',' << s.arg << ',' << s.norm_emp << '\n';
}

void write_box_counts_csv(std::ostream& os, const std::vector<BoxCount>& boxes) {
    precise(os) << "re_min,re_max,im_min,im_max,winding,poles,zeros,samples,retries,ok\n";
    for (const auto& b : boxes)
        os << b.box.re_min << ',' << b.box.re_max << ',' << b.box.im_min << ',' << b.box.im_max << ',' << b.winding << ','
           << b.poles << ',' << b.zeros << ',' << b.samples << ',' << b.retries << ',' << (b.ok ? 1 : 0) << '\n';
}

std::string ladder_report_json(const LadderResult& result, const CrosscheckReport* crosscheck) {
    json rungs = json::array();
    for (const auto& r : result.rungs) {
        json images = json::array();
        for (const auto& z : r.images) images.push_back(complex_json(z));
        rungs.push_back(json{{"k", r.k},
                             {"mu", r.mu},
                             {"mu_next", r.mu_next},
                             {"theta", r.theta},
                             {"window_re", interval_json(r.window_re)},
                             {"tau", r.tau},
                             {"tau_bracket", json::array({r.tau_lo, r.tau_hi})},
                             {"gap_distance", r.gap.distance},
                             {"gap_bound", r.gap.bound},
                             {"saturated", r.saturated},
                             {"resonances", resonance_array(r.set)},
                             {"images", images},
                             {"movement", r.movement},
                             {"max_movement", r.max_movement},
                             {"tolerance", r.tolerance},
                             {"match_success", r.match.success},
                             {"intermediate_distance", r.intermediate_distance},
                             {"link_drift", r.link_drift},
                             {"property", property_json(r.property)}});
    }
    json limit = json::array();
    for (const auto& e : result.limit.entries) {
        json history = json::array();
        for (const auto& z : e.history) history.push_back(complex_json(z));
        limit.push_back(json{{"re", e.rho.real()},
                             {"im", e.rho.imag()},
                             {"multiplicity", e.multiplicity},
                             {"case", e.tag == LadderCase::A ? "A" : "B"},
                             {"exit_rung", e.exit_rung},
                             {"exit_reason", e.exit_reason},
                             {"tail_bound", e.tail_bound},
                             {"history", history},
                             {"movements", e.movements}});
    }
    json cross = json::array();
    if (crosscheck) {
        for (const auto& p : crosscheck->pairs)
            cross.push_back(json{{"a", complex_json(p.a)},
                                 {"b", complex_json(p.b)},
                                 {"distance", p.distance},
                                 {"im", p.im},
                                 {"ratio1", p.ratio[0]},
                                 {"ratio2", p.ratio[1]},
                                 {"ratio3", p.ratio[2]},
                                 {"flagged", p.flagged}});
    }
    const json out{{"h", result.config.h},
                   {"stop_reason", result.stop_reason},
                   {"property", property_json(result.property)},
                   {"movements", result.movements},
                   {"ratios", result.ratios},
                   {"ratio_bound", result.ratio_bound},
                   {"rungs", rungs},
                   {"limit_set", limit},
                   {"crosschecks", cross}};
    return out.dump(2);
}

void write_chain_csv(std::ostream& os, const LadderResult& result) {
    precise(os) << "entry,rung,re,im,movement,tag\n";
    for (std::size_t i = 0; i < result.limit.entries.size(); ++i) {
        const auto& e = result.limit.entries[i];
        for (std::size_t k = 0; k < e.history.size(); ++k) {
            const double mv = k < e.movements.size() ? e.movements[k] : 0.0;
            os << i << ',' << k << ',' << e.history[k].real() << ',' << e.history[k].imag() << ',' << mv << ','
               << (e.tag == LadderCase::A ? 'A' : 'B') << '\n';
        }
    }
}

}  // namespace resonette
