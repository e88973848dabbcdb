#include "deflect/io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace deflect {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

}  // namespace

void write_csv(const DistributionGrid& dist, const std::string& path) {
    FilePtr f = open_or_throw(path, "wb");
    const bool momentum = dist.kind == AxisKind::Momentum;
    std::fprintf(f.get(), "%s\n", momentum ? "p_x,p_y,value" : "x,y,value");
    const SpatialGrid& g = dist.grid;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x(ix);
        for (int iy = 0; iy < g.ny; ++iy)
            std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", x, g.y(iy),
                         dist.value(ix, iy));
    }
}

nlohmann::json distribution_to_json(const DistributionGrid& dist) {
    nlohmann::json doc;
    doc["kind"] = dist.kind == AxisKind::Momentum ? "momentum" : "position";
    doc["normalization"] =
        dist.normalization == Normalization::UnitMass ? "unit" : "raw";
    const SpatialGrid& g = dist.grid;
    std::vector<double> xs(g.nx), ys(g.ny);
    for (int i = 0; i < g.nx; ++i) xs[i] = g.x(i);
    for (int j = 0; j < g.ny; ++j) ys[j] = g.y(j);
    doc["x"] = xs;
    doc["y"] = ys;
    nlohmann::json rows = nlohmann::json::array();
    for (int ix = 0; ix < g.nx; ++ix) {
        nlohmann::json row = nlohmann::json::array();
        for (int iy = 0; iy < g.ny; ++iy) row.push_back(dist.value(ix, iy));
        rows.push_back(std::move(row));
    }
    doc["values"] = std::move(rows);
    doc["truncation_tail_ratio"] = dist.truncation_tail_ratio;
    doc["boundary_mass_fraction"] = dist.boundary_mass_fraction;
    return doc;
}

void write_json(const nlohmann::json& doc, const std::string& path) {
    FilePtr f = open_or_throw(path, "wb");
    const std::string text = doc.dump(2);
    std::fwrite(text.data(), 1, text.size(), f.get());
    std::fputc('\n', f.get());
}

void write_png(const DistributionGrid& dist, const std::string& path) {
    const SpatialGrid& g = dist.grid;
    double vmax = 0.0;
    for (double v : dist.values) vmax = std::max(vmax, v);
    const double scale = vmax > 0.0 ? 255.0 / vmax : 0.0;

    FilePtr f = open_or_throw(path, "wb");
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng error while writing " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, g.nx, g.ny, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(g.nx);
    for (int iy = g.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < g.nx; ++ix)
            row[ix] = static_cast<png_byte>(
                std::clamp(dist.value(ix, iy) * scale, 0.0, 255.0));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(h));
    return out;
}

}  // namespace deflect
