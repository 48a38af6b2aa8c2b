#pragma once

// Raster (binary PPM) and vector (SVG) rendering of configurations.

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "noise.hpp"
#include "robinson.hpp"

namespace nsft::render {

using RGB = std::array<std::uint8_t, 3>;

inline const RGB WHITE{255, 255, 255};
inline const RGB OBSCURED{255, 0, 255};
inline const RGB FLIPPED{255, 140, 0};
inline const RGB SQUARE_OUTLINE{0, 200, 200};
inline const RGB PATCH{120, 60, 0};
inline const RGB CHANNEL{230, 180, 120};

struct RenderStyle {
    int cell = 5;  // pixels per cell, odd
    std::map<char, RGB> palette{{robinson::RED, {220, 0, 0}},
                                {robinson::BLACK, {0, 0, 0}},
                                {robinson::BLUE, {0, 70, 230}},
                                {robinson::GREEN, {0, 160, 60}},
                                {robinson::NONE, {170, 170, 170}}};
    // generic alphabets: colour of symbol i
    std::vector<RGB> symbols{{255, 255, 255}, {0, 0, 0}, {220, 0, 0}, {0, 70, 230},
                             {0, 160, 60}, {240, 200, 0}, {128, 0, 128}, {0, 160, 160}};
    bool noise = false, flips = false, red_squares = false, patches = false;
};

struct Overlays {
    const NoiseField* noise = nullptr;
    const FlipLog* flips = nullptr;
    std::vector<robinson::Square> squares;
    std::vector<std::uint8_t> patch_kind;  // per cell: 0 none, 1 patch, 2 channel
};

struct Image {
    int width = 0, height = 0;
    std::vector<RGB> px;
    Image(int w, int h) : width(w), height(h), px(std::size_t(w) * h, WHITE) {}
    RGB& at(int x, int y) { return px[std::size_t(y) * width + x]; }
    const RGB& at(int x, int y) const { return px[std::size_t(y) * width + x]; }
    long count(const RGB& c) const {
        long n = 0;
        for (auto& p : px) n += p == c;
        return n;
    }
};

inline RGB colour_of(const RenderStyle& st, char c) {
    auto it = st.palette.find(c);
    if (it == st.palette.end()) throw input_error(std::string("unmapped channel colour '") + c + "'");
    return it->second;
}

// Image rows run top to bottom; configuration rows run south to north.
inline Image render_config(const Configuration& c, const RenderStyle& st, const Overlays& ov = {},
                           const robinson::Tileset* ts = nullptr) {
    using namespace robinson;
    require(st.cell >= 1 && st.cell % 2 == 1, "cell pixel size must be odd");
    require(c.width > 0 && c.height > 0, "empty configuration");
    const int k = st.cell, m = k / 2;
    Image img(c.width * k, c.height * k);
    auto cell_px = [&](int x, int y, int px, int py) -> RGB& { return img.at(x * k + px, (c.height - 1 - y) * k + py); };
    for (int y = 0; y < c.height; ++y)
        for (int x = 0; x < c.width; ++x) {
            Sym s = c.at(x, y);
            if (!ts) {
                if (s >= st.symbols.size()) throw input_error("unmapped symbol " + std::to_string(s));
                for (int py = 0; py < k; ++py)
                    for (int px = 0; px < k; ++px) cell_px(x, y, px, py) = st.symbols[s];
                continue;
            }
            const auto& in = ts->info.at(s);
            bool all = in.family == "bumpy" || in.family == "cross" || in.family == "p-crossing" ||
                       in.family == "np-crossing";
            RGB centre = WHITE;
            int rank = -1;
            for (int d = 0; d < 4; ++d) {
                if (!all && d != in.main_axis && d != opp(in.main_axis)) continue;
                const auto& l = in.tile.e[d];
                RGB col = colour_of(st, l.P ? l.col.main : char(NONE));
                int r = l.P ? (l.col.main == RED ? 3 : 2) : 1;
                if (r > rank) rank = r, centre = col;
                for (int t = 1; t <= m; ++t) {
                    int px = m + DX[d] * t, py = m - DY[d] * t;
                    cell_px(x, y, px, py) = col;
                }
            }
            cell_px(x, y, m, m) = centre;
        }
    if (st.patches && !ov.patch_kind.empty()) {
        require(ov.patch_kind.size() == c.cells.size(), "patch overlay does not match the configuration");
        for (int y = 0; y < c.height; ++y)
            for (int x = 0; x < c.width; ++x) {
                auto p = ov.patch_kind[std::size_t(y) * c.width + x];
                if (p) cell_px(x, y, 0, 0) = p == 1 ? PATCH : CHANNEL;
            }
    }
    if (st.red_squares)
        for (auto& sq : ov.squares) {
            int x0 = sq.x0 * k, x1 = (sq.x1 + 1) * k - 1;
            int y0 = (c.height - 1 - sq.y1) * k, y1 = (c.height - sq.y0) * k - 1;
            for (int x = x0; x <= x1; ++x) img.at(x, y0) = img.at(x, y1) = SQUARE_OUTLINE;
            for (int y = y0; y <= y1; ++y) img.at(x0, y) = img.at(x1, y) = SQUARE_OUTLINE;
        }
    if (st.flips && ov.flips)
        for (auto& e : ov.flips->events) {
            if (!e.flipped) continue;
            long side = (1L << e.scale) - 1;
            for (long i = 0; i < side; ++i) {
                int xs[] = {int(e.x + i), e.x, int(e.x + i), int(e.x + side - 1)};
                int ys[] = {e.y, int(e.y + i), int(e.y + side - 1), int(e.y + i)};
                for (int q = 0; q < 4; ++q)
                    if (c.inside(xs[q], ys[q])) cell_px(xs[q], ys[q], k - 1, k - 1) = FLIPPED;
            }
        }
    if (st.noise && ov.noise) {
        require(ov.noise->width == c.width && ov.noise->height == c.height, "noise overlay does not match the configuration");
        for (int y = 0; y < c.height; ++y)
            for (int x = 0; x < c.width; ++x)
                if (ov.noise->at(x, y)) cell_px(x, y, m, m) = OBSCURED;
    }
    return img;
}

inline void write_ppm(std::ostream& os, const Image& img) {
    os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    for (auto& p : img.px) os.write(reinterpret_cast<const char*>(p.data()), 3);
}

// One rectangle per non-white pixel run in each row.
inline void write_svg(std::ostream& os, const Image& img) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << img.width << "\" height=\"" << img.height
       << "\" shape-rendering=\"crispEdges\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    char hex[8];
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width;) {
            RGB c = img.at(x, y);
            int e = x + 1;
            while (e < img.width && img.at(e, y) == c) ++e;
            if (c != WHITE) {
                std::snprintf(hex, sizeof hex, "#%02x%02x%02x", c[0], c[1], c[2]);
                os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << e - x << "\" height=\"1\" fill=\"" << hex
                   << "\"/>\n";
            }
            x = e;
        }
    os << "</svg>\n";
}

struct Component {
    int x0, y0, x1, y1;
    long pixels;
};

// Connected components (4-neighbour) of pixels of one colour.
inline std::vector<Component> colour_components(const Image& img, const RGB& c) {
    std::vector<char> seen(img.px.size(), 0);
    std::vector<Component> out;
    std::vector<std::pair<int, int>> st;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            if (seen[std::size_t(y) * img.width + x] || img.at(x, y) != c) continue;
            Component comp{x, y, x, y, 0};
            st.push_back({x, y});
            seen[std::size_t(y) * img.width + x] = 1;
            while (!st.empty()) {
                auto [cx, cy] = st.back();
                st.pop_back();
                ++comp.pixels;
                comp.x0 = std::min(comp.x0, cx);
                comp.x1 = std::max(comp.x1, cx);
                comp.y0 = std::min(comp.y0, cy);
                comp.y1 = std::max(comp.y1, cy);
                const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int nx = cx + dx[d], ny = cy + dy[d];
                    if (nx < 0 || ny < 0 || nx >= img.width || ny >= img.height) continue;
                    auto& sn = seen[std::size_t(ny) * img.width + nx];
                    if (sn || img.at(nx, ny) != c) continue;
                    sn = 1;
                    st.push_back({nx, ny});
                }
            }
            out.push_back(comp);
        }
    return out;
}

// Closed square outlines: components with a square bounding box whose four corners are set.
inline int square_outlines(const Image& img, const RGB& c) {
    int n = 0;
    for (auto& k : colour_components(img, c))
        if (k.x1 - k.x0 == k.y1 - k.y0 && k.x1 > k.x0 && img.at(k.x0, k.y0) == c && img.at(k.x1, k.y0) == c &&
            img.at(k.x0, k.y1) == c && img.at(k.x1, k.y1) == c)
            ++n;
    return n;
}

}  // namespace nsft::render
