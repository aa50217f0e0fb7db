#include "pansharp/io.hpp"

#include "pansharp/error.hpp"

#include <json.hpp>

#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pansharp::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t positive_field(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
        throw IoError(std::string("header field '") + key + "' must be a positive integer");
    }
    return v.get<std::size_t>();
}

} // namespace

RasterHeader parse_header(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("header is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw IoError("header must be a JSON object");

    static const std::set<std::string> known = {"width", "height", "bands", "dtype",
                                                "layout", "byte_order", "band_names"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw IoError("header has unknown field '" + key + "'");
    }
    for (const char* key : {"width", "height", "bands", "dtype", "layout", "byte_order"}) {
        if (!j.contains(key)) throw IoError(std::string("header is missing field '") + key + "'");
    }

    RasterHeader h;
    h.width = positive_field(j, "width");
    h.height = positive_field(j, "height");
    h.bands = positive_field(j, "bands");
    h.dtype = j.at("dtype").get<std::string>();
    h.layout = j.at("layout").get<std::string>();
    h.byte_order = j.at("byte_order").get<std::string>();
    if (h.dtype != "f32") throw IoError("unsupported dtype '" + h.dtype + "' (expected f32)");
    if (h.layout != "band-sequential") throw IoError("unsupported layout '" + h.layout + "'");
    if (h.byte_order != "little-endian") {
        throw IoError("unsupported byte_order '" + h.byte_order + "'");
    }
    if (j.contains("band_names")) {
        h.band_names = j.at("band_names").get<std::vector<std::string>>();
        if (h.band_names.size() != h.bands) {
            throw IoError("header lists " + std::to_string(h.band_names.size()) +
                          " band names for " + std::to_string(h.bands) + " bands");
        }
    }
    return h;
}

std::string serialize_header(const RasterHeader& h) {
    // ordered_json keeps the field order stable for byte-identical output
    nlohmann::ordered_json j;
    j["width"] = h.width;
    j["height"] = h.height;
    j["bands"] = h.bands;
    j["dtype"] = h.dtype;
    j["layout"] = h.layout;
    j["byte_order"] = h.byte_order;
    if (!h.band_names.empty()) j["band_names"] = h.band_names;
    return j.dump(2) + "\n";
}

MultibandImage read_image(const fs::path& header_path, const fs::path& data_path,
                          std::uint64_t payload_cap) {
    RasterHeader h;
    try {
        h = parse_header(slurp(header_path));
    } catch (const IoError& e) {
        throw IoError(header_path.string() + ": " + e.what());
    } catch (const json::exception& e) {
        throw IoError(header_path.string() + ": " + e.what());
    }

    // overflow-safe size check before allocating anything
    const std::uint64_t cap_pixels = payload_cap / 4;
    if (h.width > cap_pixels || h.height > cap_pixels / h.width ||
        h.bands > cap_pixels / (h.width * h.height)) {
        throw IoError(header_path.string() + ": payload exceeds the " +
                      std::to_string(payload_cap) + "-byte cap");
    }
    const std::uint64_t expected = h.payload_bytes();

    std::ifstream in(data_path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError(data_path.string() + ": cannot open for reading");
    const auto actual = static_cast<std::uint64_t>(in.tellg());
    if (actual != expected) {
        const std::string detail =
            actual < expected ? " (short by " + std::to_string(expected - actual) + " bytes)"
                              : " (" + std::to_string(actual - expected) + " extra bytes)";
        throw IoError(data_path.string() + ": payload is " + std::to_string(actual) +
                      " bytes, header requires " + std::to_string(expected) + detail);
    }
    in.seekg(0);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(expected));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw IoError(data_path.string() + ": read failed");

    const std::size_t plane = h.width * h.height;
    std::vector<Raster> bands;
    bands.reserve(h.bands);
    for (std::size_t b = 0; b < h.bands; ++b) {
        std::vector<double> samples(plane);
        for (std::size_t i = 0; i < plane; ++i) {
            const unsigned char* p = bytes.data() + 4 * (b * plane + i);
            const std::uint32_t bits = std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 |
                                       std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
            const double v = std::bit_cast<float>(bits);
            if (!std::isfinite(v)) {
                throw IoError(data_path.string() + ": non-finite sample in band " +
                              std::to_string(b));
            }
            samples[i] = v;
        }
        bands.emplace_back(h.width, h.height, std::move(samples));
    }
    return MultibandImage(std::move(bands));
}

void write_image(const MultibandImage& img, const fs::path& header_path,
                 const fs::path& data_path, const std::vector<std::string>& band_names) {
    RasterHeader h;
    h.width = img.width();
    h.height = img.height();
    h.bands = img.band_count();
    h.band_names = band_names;
    if (!band_names.empty() && band_names.size() != h.bands) {
        throw DimensionError("write_image: " + std::to_string(band_names.size()) +
                             " band names for " + std::to_string(h.bands) + " bands");
    }

    std::vector<unsigned char> bytes;
    bytes.reserve(static_cast<std::size_t>(h.payload_bytes()));
    for (const auto& band : img.bands()) {
        for (double v : band.samples()) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<unsigned char>(bits >> s));
        }
    }

    {
        std::ofstream out(data_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(data_path.string() + ": cannot open for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError(data_path.string() + ": write failed");
    }
    std::ofstream out(header_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(header_path.string() + ": cannot open for writing");
    out << serialize_header(h);
    if (!out) throw IoError(header_path.string() + ": write failed");
}

Raster import_pgm(const fs::path& path, std::uint64_t payload_cap) {
    const std::string data = slurp(path);
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) -> IoError { return IoError(path.string() + ": " + why); };

    if (data.size() < 2 || data[0] != 'P' || data[1] != '5') {
        throw fail("not a binary PGM (expected magic P5)");
    }
    pos = 2;
    auto next_token = [&]() -> std::uint64_t {
        for (;;) {
            while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
            if (pos < data.size() && data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        if (pos >= data.size() || !std::isdigit(static_cast<unsigned char>(data[pos]))) {
            throw fail("malformed PGM header");
        }
        std::uint64_t v = 0;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
            v = v * 10 + static_cast<std::uint64_t>(data[pos++] - '0');
            if (v > (std::uint64_t{1} << 40)) throw fail("PGM header value out of range");
        }
        return v;
    };
    const std::uint64_t width = next_token();
    const std::uint64_t height = next_token();
    const std::uint64_t maxval = next_token();
    if (width == 0 || height == 0) throw fail("PGM dimensions must be positive");
    if (maxval == 0 || maxval > 65535) {
        throw fail("PGM maxval " + std::to_string(maxval) + " outside 1..65535");
    }
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
        throw fail("malformed PGM header");
    }
    ++pos; // single whitespace before the raster

    const std::uint64_t bytes_per_sample = maxval < 256 ? 1 : 2;
    if (width > payload_cap || height > payload_cap / width ||
        width * height > payload_cap / bytes_per_sample) {
        throw fail("PGM payload exceeds the " + std::to_string(payload_cap) + "-byte cap");
    }
    const std::uint64_t needed = width * height * bytes_per_sample;
    if (data.size() - pos < needed) {
        throw fail("PGM raster is short by " + std::to_string(needed - (data.size() - pos)) +
                   " bytes");
    }

    std::vector<double> samples(static_cast<std::size_t>(width * height));
    const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = bytes_per_sample == 1
                         ? static_cast<double>(p[i])
                         : static_cast<double>(unsigned{p[2 * i]} << 8 | unsigned{p[2 * i + 1]});
    }
    return Raster(static_cast<std::size_t>(width), static_cast<std::size_t>(height),
                  std::move(samples));
}

std::vector<double> read_weights(const fs::path& path) {
    try {
        const json j = json::parse(slurp(path));
        if (!j.is_array()) throw IoError(path.string() + ": weights must be a JSON array");
        std::vector<double> out;
        for (const auto& v : j) {
            if (!v.is_number()) throw IoError(path.string() + ": weights must be numbers");
            out.push_back(v.get<double>());
        }
        return out;
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

ImagePaths image_paths(const fs::path& stem) {
    fs::path base = stem;
    if (base.extension() == ".json" || base.extension() == ".raw") base.replace_extension();
    fs::path header = base;
    fs::path data = base;
    header += ".json";
    data += ".raw";
    return {header, data};
}

MultibandImage load_image(const fs::path& stem) {
    if (stem.extension() == ".pgm") {
        return MultibandImage({import_pgm(stem)});
    }
    const auto paths = image_paths(stem);
    return read_image(paths.header, paths.data);
}

void save_image(const MultibandImage& img, const fs::path& stem) {
    const auto paths = image_paths(stem);
    write_image(img, paths.header, paths.data);
}

} // namespace pansharp::io
