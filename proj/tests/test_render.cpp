#include <doctest.h>

#include <sstream>

#include "nsft/render.hpp"

using namespace nsft;
namespace rb = nsft::robinson;

TEST_CASE("tiny images") {
    const auto& ts = rb::build_tileset(rb::Variant::red_black);
    auto one = rb::build_macro_tile({rb::Variant::red_black, 1, rb::Orientation::NE, {}});
    render::RenderStyle st;
    auto img = render::render_config(one, st, {}, &ts);
    CHECK(img.width == 5);
    CHECK(img.height == 5);
    std::ostringstream ppm;
    render::write_ppm(ppm, img);
    CHECK(ppm.str().rfind("P6\n5 5\n255\n", 0) == 0);
    CHECK(ppm.str().size() == 11 + 75);

    Configuration g(2, 1, Alphabet::digits(2));
    g.cells = {0, 1};
    st.cell = 1;
    auto gi = render::render_config(g, st);
    CHECK(gi.at(0, 0) == st.symbols[0]);
    CHECK(gi.at(1, 0) == st.symbols[1]);
    st.cell = 4;
    CHECK_THROWS_AS(render::render_config(g, st), input_error);
}

TEST_CASE("outlines and noise overlay agree with the data") {
    const auto& ts = rb::build_tileset(rb::Variant::red_black);
    for (char base : {rb::RED, rb::BLACK}) {
        rb::MacroTileSpec spec{rb::Variant::red_black, 5, rb::Orientation::SE, {}};
        spec.colours.base = base;
        auto c = rb::build_macro_tile(spec);
        render::RenderStyle st;
        auto clean = render::render_config(c, st, {}, &ts);
        CHECK(render::square_outlines(clean, st.palette.at(rb::RED)) == long(rb::census(c, ts).red_square_sides.size()));

        auto noise = sample_noise(c.width, c.height, 0.2, 11);
        render::Overlays ov;
        ov.noise = &noise;
        st.noise = true;
        CHECK(render::render_config(c, st, ov, &ts).count(render::OBSCURED) == noise.popcount());
    }
}
