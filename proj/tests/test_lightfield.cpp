#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "plenopose/errors.hpp"
#include "plenopose/lightfield.hpp"
#include "plenopose/lightfield_io.hpp"

#include "helpers.hpp"

using namespace plenopose;

TEST_SUITE_BEGIN("lightfield");

TEST_CASE("index order is row-major y,x,t,s,c") {
    LightField4D lf(2, 3, 3, 5);
    CHECK(lf.index(0, 0, 0, 0, 0) == 0);
    CHECK(lf.index(0, 0, 0, 0, 2) == 2);
    CHECK(lf.index(0, 0, 0, 1, 0) == 3);       // next s
    CHECK(lf.index(0, 0, 1, 0, 0) == 15);      // next t: angular_w * 3
    CHECK(lf.index(0, 1, 0, 0, 0) == 45);      // next x: 3*5*3
    CHECK(lf.index(1, 0, 0, 0, 0) == 3 * 45);  // next y
    CHECK(lf.center_s() == 2);
    CHECK(lf.center_t() == 1);
}

TEST_CASE("validate rejects even angular extents and out-of-range samples") {
    CHECK_THROWS_AS(LightField4D(4, 4, 2, 3).validate(), ValidationError);
    CHECK_THROWS_AS(LightField4D(4, 4, 3, 4).validate(), ValidationError);
    LightField4D lf(2, 2, 3, 3, 0.5);
    CHECK_NOTHROW(lf.validate());
    lf.data[5] = 1.5;
    CHECK_THROWS_AS(lf.validate(), ValidationError);
    lf.data[5] = std::nan("");
    CHECK_THROWS_AS(lf.validate(), ValidationError);
}

TEST_CASE("subaperture extraction and reassembly round-trip") {
    const LightField4D lf = testutil::random_lightfield(6, 7, 3, 3, 42);
    std::vector<std::vector<Image>> views(3);
    for (int t = 0; t < 3; ++t)
        for (int s = 0; s < 3; ++s) views[t].push_back(subaperture_view(lf, s, t));
    const LightField4D back = assemble_views(views);
    REQUIRE(back.data.size() == lf.data.size());
    for (std::size_t i = 0; i < lf.data.size(); ++i)
        CHECK(back.data[i] == doctest::Approx(lf.data[i]).epsilon(0.0));
    CHECK_THROWS_AS(subaperture_view(lf, 3, 0), IndexError);
}

TEST_CASE("angular patch and epi slices agree with direct indexing") {
    const LightField4D lf = testutil::random_lightfield(5, 6, 3, 5, 7);
    const AngularPatch patch = angular_patch(lf, 2, 3);
    for (int t = 0; t < 3; ++t)
        for (int s = 0; s < 5; ++s)
            for (int c = 0; c < 3; ++c)
                CHECK(patch.at(t, s, c) == lf.at(3, 2, t, s, c));

    const EpiSlice es = epi_slice_s(lf, 1, 2);
    CHECK(es.spatial_extent == 6);
    CHECK(es.angular_extent == 5);
    for (int x = 0; x < 6; ++x)
        for (int s = 0; s < 5; ++s)
            CHECK(es.at(x, s, 0) == lf.at(1, x, 2, s, 0));

    const EpiSlice et = epi_slice_t(lf, 4, 1);
    CHECK(et.spatial_extent == 5);
    CHECK(et.angular_extent == 3);
    for (int y = 0; y < 5; ++y)
        for (int t = 0; t < 3; ++t)
            CHECK(et.at(y, t, 2) == lf.at(y, 4, t, 1, 2));
}

TEST_CASE("angular subsample keeps odd extents and every stride-th view") {
    const LightField4D lf = testutil::random_lightfield(4, 4, 5, 5, 9);
    const LightField4D half = angular_subsample(lf, 2);
    CHECK(half.angular_h == 3);
    CHECK(half.angular_w == 3);
    CHECK(half.at(1, 2, 1, 2, 0) == lf.at(1, 2, 2, 4, 0));
    CHECK_THROWS_AS(angular_subsample(lf, 4), ValidationError);
}

TEST_CASE("disparity formula") {
    CameraModel cam;
    cam.fx = 500.0;
    cam.fy = 500.0;
    cam.cx = 10.0;
    cam.cy = 10.0;
    cam.baseline = 0.01;
    cam.image_w = 21;
    cam.image_h = 21;
    CHECK(depth_to_disparity(cam, 1.0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(depth_to_disparity(cam, 0.5) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK_THROWS_AS(depth_to_disparity(cam, 0.0), DomainError);
}

// A fronto-parallel textured plane at known depth: every view is the center
// view translated by disparity * (view offset). Shearing at that disparity
// must equalize all views with the center exactly (integer shift, so the
// bilinear resampling lands on whole pixels).
TEST_CASE("shear equalizes a constant-depth scene at integer disparity") {
    const int sh = 32, sw = 32, ah = 3, aw = 3;
    const double disparity = 2.0;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image center(sh, sw, 3);
    for (double& v : center.data) v = uni(rng);

    LightField4D lf(sh, sw, ah, aw);
    const int cs = lf.center_s(), ct = lf.center_t();
    for (int y = 0; y < sh; ++y)
        for (int x = 0; x < sw; ++x)
            for (int t = 0; t < ah; ++t)
                for (int s = 0; s < aw; ++s) {
                    // View (t, s) sees the plane shifted by d * offset.
                    const int ys = y + static_cast<int>(disparity) * (t - ct);
                    const int xs = x + static_cast<int>(disparity) * (s - cs);
                    for (int c = 0; c < 3; ++c)
                        lf.at(y, x, t, s, c) =
                            center.at(std::clamp(ys, 0, sh - 1),
                                      std::clamp(xs, 0, sw - 1), c);
                }

    const ShearedLightField sheared = shear(lf, disparity);
    double worst = 0.0;
    int checked = 0;
    for (int y = 0; y < sh; ++y)
        for (int x = 0; x < sw; ++x)
            for (int t = 0; t < ah; ++t)
                for (int s = 0; s < aw; ++s) {
                    if (!sheared.is_valid(y, x, t, s)) continue;
                    // Skip pixels whose source was clamped at the frame.
                    const int ys = y + static_cast<int>(disparity) * (t - ct);
                    const int xs = x + static_cast<int>(disparity) * (s - cs);
                    if (ys < 0 || ys >= sh || xs < 0 || xs >= sw) continue;
                    for (int c = 0; c < 3; ++c) {
                        worst = std::max(
                            worst, std::abs(sheared.field.at(y, x, t, s, c) -
                                            center.at(y, x, c)));
                        ++checked;
                    }
                }
    CHECK(checked > 1000);
    CHECK(worst < 1e-3);

    // The center view passes through unchanged under any disparity.
    const ShearedLightField off = shear(lf, 0.37);
    for (int y = 0; y < sh; ++y)
        for (int x = 0; x < sw; ++x)
            CHECK(off.field.at(y, x, ct, cs, 0) == lf.at(y, x, ct, cs, 0));
}

TEST_CASE("shear flags out-of-frame samples invalid instead of clamping") {
    const LightField4D lf = testutil::random_lightfield(8, 8, 3, 3, 5);
    const ShearedLightField sheared = shear(lf, 3.0);
    // Pixel x=0 in a view with s > center needs a source at x=-3: invalid.
    CHECK_FALSE(sheared.is_valid(4, 0, 1, 2));
    CHECK(sheared.field.at(4, 0, 1, 2, 0) == 0.0);
    CHECK(sheared.is_valid(4, 4, 1, 1));
}

TEST_CASE("shear of a sheared field composes disparities") {
    const LightField4D lf = testutil::random_lightfield(16, 16, 3, 3, 21);
    const ShearedLightField once = shear(lf, 1.0);
    const ShearedLightField twice = shear(once, 1.0);
    const ShearedLightField direct = shear(lf, 2.0);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            for (int t = 0; t < 3; ++t)
                for (int s = 0; s < 3; ++s) {
                    if (!twice.is_valid(y, x, t, s)) continue;
                    REQUIRE(direct.is_valid(y, x, t, s));
                    for (int c = 0; c < 3; ++c)
                        CHECK(twice.field.at(y, x, t, s, c) ==
                              doctest::Approx(direct.field.at(y, x, t, s, c))
                                  .epsilon(1e-12));
                }
}

TEST_CASE("container round-trip through 16-bit PNG views") {
    testutil::TempDir tmp("lf_roundtrip");
    LightFieldContainer cont;
    cont.field = testutil::random_lightfield(12, 10, 3, 3, 77);
    cont.camera.fx = 400.0;
    cont.camera.fy = 410.0;
    cont.camera.cx = 4.5;
    cont.camera.cy = 5.5;
    cont.camera.baseline = 0.02;
    cont.camera.image_w = 10;
    cont.camera.image_h = 12;
    store_lightfield(cont, tmp.path());
    const LightFieldContainer back = load_lightfield(tmp.path());
    CHECK(back.camera.fx == cont.camera.fx);
    CHECK(back.camera.baseline == cont.camera.baseline);
    REQUIRE(back.field.data.size() == cont.field.data.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < cont.field.data.size(); ++i)
        worst = std::max(worst,
                         std::abs(back.field.data[i] - cont.field.data[i]));
    // 16-bit quantization: half a step of 1/65535.
    CHECK(worst <= 0.5 / 65535.0 + 1e-12);
}

TEST_CASE("loading fails loudly when a view image is missing") {
    testutil::TempDir tmp("lf_missing");
    LightFieldContainer cont;
    cont.field = testutil::random_lightfield(6, 6, 3, 3, 3);
    cont.camera.fx = 100.0;
    cont.camera.fy = 100.0;
    cont.camera.cx = 2.5;
    cont.camera.cy = 2.5;
    cont.camera.baseline = 0.01;
    cont.camera.image_w = 6;
    cont.camera.image_h = 6;
    store_lightfield(cont, tmp.path());
    std::filesystem::remove(tmp.path() / "view_1_2.png");
    CHECK_THROWS_AS(load_lightfield(tmp.path()), ParseError);
}

TEST_SUITE_END();
