#include <doctest.h>

#include <cmath>

#include "plenopose/errors.hpp"
#include "plenopose/model.hpp"

#include "helpers.hpp"

using namespace plenopose;

TEST_SUITE_BEGIN("model");

TEST_CASE("cylinder diameter is the cap-rim diagonal") {
    const ParametricMesh mesh = ParametricMesh::cylinder(0.04, 0.12);
    // Farthest surface pair: opposite rim points of the two caps,
    // sqrt(h^2 + (2r)^2).
    CHECK(mesh_diameter(mesh) ==
          doctest::Approx(std::sqrt(0.12 * 0.12 + 0.08 * 0.08))
              .epsilon(1e-12));
}

TEST_CASE("sampled points lie on the cylinder surface") {
    const ParametricMesh mesh = ParametricMesh::cylinder(0.03, 0.1);
    const ObjectModel model = make_object(mesh, 500, "cyl");
    REQUIRE(static_cast<int>(model.points.size()) == 500);
    CHECK(model.label == "cyl");
    CHECK(model.diameter == doctest::Approx(mesh_diameter(mesh)));
    for (const Eigen::Vector3d& p : model.points) {
        const double rho = std::hypot(p.x(), p.y());
        const bool on_wall =
            std::abs(rho - 0.03) < 1e-9 && p.z() > -0.05 - 1e-9 &&
            p.z() < 0.05 + 1e-9;
        const bool on_cap =
            (std::abs(p.z() - 0.05) < 1e-9 || std::abs(p.z() + 0.05) < 1e-9) &&
            rho <= 0.03 + 1e-9;
        CHECK((on_wall || on_cap));
    }
}

TEST_CASE("sampling is deterministic") {
    const ParametricMesh mesh = ParametricMesh::cylinder(0.04, 0.12);
    const ObjectModel a = make_object(mesh, 300);
    const ObjectModel b = make_object(mesh, 300);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i)
        CHECK(a.points[i] == b.points[i]);
}

TEST_CASE("two-knot constant-radius lathe equals the cylinder") {
    const ParametricMesh cyl = ParametricMesh::cylinder(0.04, 0.12);
    const ParametricMesh lat =
        ParametricMesh::lathe({{-0.06, 0.04}, {0.06, 0.04}});
    CHECK(mesh_diameter(lat) == doctest::Approx(mesh_diameter(cyl)).epsilon(1e-12));
    const ObjectModel mc = make_object(cyl, 400);
    const ObjectModel ml = make_object(lat, 400);
    REQUIRE(mc.points.size() == ml.points.size());
    for (std::size_t i = 0; i < mc.points.size(); ++i)
        CHECK((mc.points[i] - ml.points[i]).norm() < 1e-9);
}

TEST_CASE("lathe validation rejects bad profiles") {
    CHECK_THROWS_AS(ParametricMesh::lathe({{0.0, 0.1}}).validate(),
                    ValidationError);
    CHECK_THROWS_AS(
        ParametricMesh::lathe({{0.1, 0.1}, {0.0, 0.1}}).validate(),
        ValidationError);
    CHECK_THROWS_AS(
        ParametricMesh::lathe({{0.0, 0.1}, {0.1, -0.2}}).validate(),
        ValidationError);
    CHECK_THROWS_AS(ParametricMesh::cylinder(-0.01, 0.1).validate(),
                    ValidationError);
}

TEST_CASE("too few samples is a domain error") {
    const ParametricMesh mesh = ParametricMesh::cylinder(0.04, 0.12);
    CHECK_THROWS_AS(make_object(mesh, 10), DomainError);
}

TEST_CASE("ray intersection hits the posed wall at the exact distance") {
    const ParametricMesh mesh = ParametricMesh::cylinder(0.04, 0.12);
    Pose pose;  // axis along camera z, centered at (0, 0, 0.5)
    pose.translation = {0.0, 0.0, 0.5};
    // Ray through the object center: first hit is the near cap at z = 0.44.
    const auto tau_center = intersect_ray(mesh, pose, {0.0, 0.0, 0.0},
                                          {0.0, 0.0, 1.0});
    REQUIRE(tau_center.has_value());
    CHECK(*tau_center == doctest::Approx(0.44).epsilon(1e-9));
    // A ray missing the object entirely.
    const auto miss = intersect_ray(mesh, pose, {0.0, 0.0, 0.0},
                                    Eigen::Vector3d(1.0, 0.0, 0.2).normalized());
    CHECK_FALSE(miss.has_value());
}

TEST_CASE("object persistence round-trips") {
    testutil::TempDir tmp("model");
    const ObjectModel model =
        make_object(ParametricMesh::cylinder(0.02, 0.08), 200, "little");
    store_object(model, tmp.path() / "obj.json");
    const ObjectModel back = load_object(tmp.path() / "obj.json");
    CHECK(back.label == "little");
    CHECK(back.diameter == doctest::Approx(model.diameter).epsilon(1e-12));
    REQUIRE(back.points.size() == model.points.size());
    for (std::size_t i = 0; i < model.points.size(); ++i)
        CHECK((back.points[i] - model.points[i]).norm() < 1e-12);
}

TEST_SUITE_END();
