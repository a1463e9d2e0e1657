#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "resonette/errors.hpp"
#include "resonette/io.hpp"

using namespace resonette;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "resonette_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("operator dump round-trips bit for bit") {
    const double h = 0.12;
    const auto p = profile_for(h, 1.1, 1.0);
    const auto v = build_approximation(make_potential("gaussian_barrier"), 0.1, {});
    DiscretizedOperator op = assemble_distorted(*v, DistortionMap(p, 0.1), h, auto_grid(h, p->linear_radius(), Geometry::half_odd, 0.25, 2.0, 2));
    op.meta.warnings.push_back("coarse");
    const std::string stem = scratch("op").string();
    write_operator_dump(stem, op);
    const DiscretizedOperator back = read_operator_dump(stem);
    CHECK(back.matrix == op.matrix);
    CHECK(back.grid.geometry == Geometry::half_odd);
    CHECK(back.grid.n_points == op.grid.n_points);
    CHECK(back.grid.x_max == op.grid.x_max);
    CHECK(back.meta.theta == 0.1);
    CHECK(back.meta.h == h);
    REQUIRE(back.meta.warnings.size() == 1);
    CHECK(back.meta.warnings[0] == "coarse");

    std::filesystem::resize_file(stem + ".bin", 16);
    CHECK_THROWS_AS(read_operator_dump(stem), ValidationError);
    CHECK_THROWS_AS(read_operator_dump(scratch("missing").string()), ValidationError);
}

TEST_CASE("resonance table serialises every entry") {
    ResonanceSet s;
    s.h = 0.05;
    s.mu = 0.1;
    s.theta = 0.08;
    s.entries.push_back({cplx(0.8, -0.04), 1, 1e-12});
    s.entries.push_back({cplx(0.9, -0.01), 2, 3e-11});
    const auto j = nlohmann::json::parse(resonance_table_json(s));
    REQUIRE(j.size() == 2);
    CHECK(j[0]["re"].get<double>() == 0.8);
    CHECK(j[0]["im"].get<double>() == -0.04);
    CHECK(j[1]["multiplicity"].get<int>() == 2);
    CHECK(j[1]["theta"].get<double>() == 0.08);

    std::ostringstream csv;
    write_resonance_csv(csv, s);
    CHECK(first_line(csv.str()) == "re,im,multiplicity,residual,h,mu,theta");
    const std::string text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("csv writers use the documented headers") {
    std::ostringstream a, b, c, d;
    const auto v = make_potential("gaussian_barrier");
    write_approximation_csv(a, *build_approximation(v, 0.1, {}), v, {0.0, 0.5});
    CHECK(first_line(a.str()) == "x,re_vmu,im_vmu,v,diff");
    write_profile_csv(b, *profile_for(0.1, 1.1, 1.0), {0.0, 1.0});
    CHECK(first_line(b.str()) == "r,b,db,d2b");
    write_determinant_csv(c, DeterminantTrace{});
    CHECK(first_line(c.str()) == "z_re,z_im,log_abs_d,arg_d,norm_emp");
    write_box_counts_csv(d, {});
    CHECK(first_line(d.str()) == "re_min,re_max,im_min,im_max,winding,poles,zeros,samples,retries,ok");
}

TEST_CASE("ladder report carries rungs, limits and crosschecks") {
    LadderResult r;
    r.config = default_ladder_config(0.09);
    r.stop_reason = "kmax";
    LimitEntry e;
    e.rho = cplx(1.07, -1e-5);
    e.history = {cplx(1.07, -1.1e-5), e.rho};
    e.movements = {1e-6};
    r.limit.entries.push_back(e);
    CrosscheckReport x;
    const auto j = nlohmann::json::parse(ladder_report_json(r, &x));
    CHECK(j["stop_reason"] == "kmax");
    CHECK(j["limit_set"].size() == 1);
    CHECK(j.contains("rungs"));
    CHECK(j.contains("crosschecks"));
    std::ostringstream csv;
    write_chain_csv(csv, r);
    CHECK(first_line(csv.str()) == "entry,rung,re,im,movement,tag");
}
