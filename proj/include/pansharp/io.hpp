#pragma once

#include "pansharp/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pansharp::io {

/// JSON sidecar describing a raw band-sequential float32 little-endian payload.
struct RasterHeader {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t bands = 0;
    std::string dtype = "f32";
    std::string layout = "band-sequential";
    std::string byte_order = "little-endian";
    std::vector<std::string> band_names;

    std::uint64_t payload_bytes() const {
        return static_cast<std::uint64_t>(width) * height * bands * 4;
    }
};

inline constexpr std::uint64_t kDefaultPayloadCap = std::uint64_t{2} << 30;

RasterHeader parse_header(const std::string& json_text);
std::string serialize_header(const RasterHeader& header);

MultibandImage read_image(const std::filesystem::path& header_path,
                          const std::filesystem::path& data_path,
                          std::uint64_t payload_cap = kDefaultPayloadCap);

void write_image(const MultibandImage& img, const std::filesystem::path& header_path,
                 const std::filesystem::path& data_path,
                 const std::vector<std::string>& band_names = {});

/// Binary P5 greymap, 8-bit or 16-bit (big-endian) samples, values as stored.
Raster import_pgm(const std::filesystem::path& path,
                  std::uint64_t payload_cap = kDefaultPayloadCap);

/// JSON array of reals.
std::vector<double> read_weights(const std::filesystem::path& path);

/// "<stem>.json" + "<stem>.raw" naming used by the command-line tools. A trailing
/// ".json" or ".raw" on `stem` is dropped.
struct ImagePaths {
    std::filesystem::path header;
    std::filesystem::path data;
};
ImagePaths image_paths(const std::filesystem::path& stem);

/// Reads a stem pair, or a .pgm file as a single band.
MultibandImage load_image(const std::filesystem::path& stem);
void save_image(const MultibandImage& img, const std::filesystem::path& stem);

} // namespace pansharp::io
