#include <doctest.h>

#include "wpharm/config.hpp"
#include "wpharm/expr.hpp"
#include "wpharm/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace wpharm;

TEST_CASE("expression grammar") {
    CHECK(Expr::parse("2 + 3*4").eval(0.0) == doctest::Approx(14.0));
    CHECK(Expr::parse("0.6 + 0.4*cos(theta)").eval(M_PI) ==
          doctest::Approx(0.2));
    CHECK(Expr::parse("10*sin(theta)").eval(M_PI / 2) ==
          doctest::Approx(10.0));
    CHECK(Expr::parse("2^3^2").eval(0.0) == doctest::Approx(512.0));
    CHECK(Expr::parse("-theta^2").eval(2.0) == doctest::Approx(-4.0));
    CHECK(Expr::parse("min(1, theta)").eval(5.0) == doctest::Approx(1.0));
    CHECK(Expr::parse("max(sign(theta), 0.5)").eval(-3.0) ==
          doctest::Approx(0.5));
    CHECK(Expr::parse("abs(cos(pi))").eval(0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(Expr::parse("2 +"), std::invalid_argument);
    CHECK_THROWS_AS(Expr::parse("foo(1)").eval(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Expr::parse("theta theta"), std::invalid_argument);
}

TEST_CASE("config registry, layering, snapshot hash") {
    Config cfg;
    CHECK(cfg.get_double("geo.step") == doctest::Approx(1e-3));
    cfg.set("solve.tol", "1e-9");
    CHECK(cfg.get_double("solve.tol") == doctest::Approx(1e-9));
    CHECK_THROWS_AS(cfg.set("no.such.key", "1"), std::invalid_argument);

    const std::string dir = std::filesystem::temp_directory_path() /
                            "wpharm_cfg_test";
    std::filesystem::create_directories(dir);
    const std::string file = dir + "/t.cfg";
    {
        std::ofstream out(file);
        out << "# comment\n geo.step = 5e-4 \nsolve.max_sweeps=7\n";
    }
    cfg.load_file(file);
    CHECK(cfg.get_double("geo.step") == doctest::Approx(5e-4));
    CHECK(cfg.get_int("solve.max_sweeps") == 7);

    Config cfg2;
    cfg2.load_file(file);
    cfg2.set("solve.tol", "1e-9");
    CHECK(cfg.hash_hex() == cfg2.hash_hex());
    cfg2.set("solve.tol", "2e-9");
    CHECK(cfg.hash_hex() != cfg2.hash_hex());

    {
        std::ofstream out(file);
        out << "bogus.key=1\n";
    }
    Config cfg3;
    CHECK_THROWS_AS(cfg3.load_file(file), std::invalid_argument);
}

TEST_CASE("mesh and map round trips") {
    const auto dir = std::filesystem::temp_directory_path() / "wpharm_io_test";
    std::filesystem::create_directories(dir);

    const Mesh mesh = build_disk_mesh(0.2);
    const std::string mesh_path = (dir / "m.mesh").string();
    write_mesh(mesh, mesh_path, "deadbeef");
    const Mesh back = read_mesh(mesh_path);
    REQUIRE(back.n_vertices() == mesh.n_vertices());
    REQUIRE(back.n_cells() == mesh.n_cells());
    CHECK(back.h == doctest::Approx(mesh.h));
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
        CHECK(back.vertices[v][0] == doctest::Approx(mesh.vertices[v][0]));
        CHECK(back.boundary[v] == mesh.boundary[v]);
    }
    REQUIRE(back.edges.size() == mesh.edges.size());
    for (std::size_t e = 0; e < mesh.edges.size(); ++e)
        CHECK(back.edges[e].w == doctest::Approx(mesh.edges[e].w));

    auto mesh_ptr = std::make_shared<const Mesh>(std::move(back));
    DiscreteMap map;
    map.mesh = mesh_ptr;
    map.target = Target::model();
    map.frozen.assign(mesh_ptr->n_vertices(), 0);
    for (std::size_t v = 0; v < mesh_ptr->n_vertices(); ++v) {
        if (v % 7 == 0)
            map.values.push_back(MapValue::basepoint());
        else
            map.values.push_back(
                MapValue::model(1.0 + 0.1 * v, std::sin(double(v))));
        map.frozen[v] = mesh_ptr->boundary[v];
    }
    const std::string map_path = (dir / "u.map").string();
    write_map(map, map_path, "deadbeef");
    const DiscreteMap mback = read_map(mesh_ptr, map_path);
    REQUIRE(mback.values.size() == map.values.size());
    for (std::size_t v = 0; v < map.values.size(); ++v) {
        CHECK(value_distance(mback.values[v], map.values[v]) < 1e-12);
        CHECK(mback.frozen[v] == map.frozen[v]);
    }

    // glued serialization with sheet -1 for P0
    DiscreteMap gmap = map;
    gmap.target = Target::glued();
    for (std::size_t v = 0; v < gmap.values.size(); ++v)
        if (!gmap.values[v].singular[0].is_basepoint())
            gmap.values[v].singular[0] = GluedPoint::on_sheet(
                int(v % 3), gmap.values[v].singular[0].point());
    const std::string gmap_path = (dir / "g.map").string();
    write_map(gmap, gmap_path, "");
    const DiscreteMap gback = read_map(mesh_ptr, gmap_path);
    for (std::size_t v = 0; v < gmap.values.size(); ++v) {
        CHECK(gback.values[v].singular[0].sheet() ==
              gmap.values[v].singular[0].sheet());
        CHECK(value_distance(gback.values[v], gmap.values[v]) < 1e-12);
    }
}

TEST_CASE("csv writer quoting and determinism") {
    const auto dir = std::filesystem::temp_directory_path() / "wpharm_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "t.csv").string();
    {
        CsvWriter csv(path, "cafe");
        csv.row({"a", "with,comma", "with\"quote"});
        csv.numeric_row({1.5, 1.0 / 3.0});
    }
    std::ifstream in(path);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    CHECK(l1 == "# config=cafe");
    CHECK(l2 == "a,\"with,comma\",\"with\"\"quote\"");
    CHECK(l3 == "1.5,0.33333333333333331");
}
