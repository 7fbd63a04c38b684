#pragma once

#include "despeckle/image.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace despeckle {

enum class IoErrorKind {
    missing_file,
    unsupported_format,
    truncated_payload,
    unwritable_path,
};

class ImageIoError : public std::runtime_error {
public:
    ImageIoError(IoErrorKind kind, const std::filesystem::path& path, const std::string& detail);

    IoErrorKind kind() const noexcept { return kind_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    IoErrorKind kind_;
    std::filesystem::path path_;
};

/// Reads binary PGM (P5, maxval 255) or 8-bit grayscale PNG. Bytes map to v/255.
Image load_image(const std::filesystem::path& path);

/// Clamps to [0,1], quantizes by round-half-up of v*255. Writes PNG when the
/// extension is .png, binary PGM otherwise.
void save_image(const Image& img, const std::filesystem::path& path);

/// 8-bit encoding used by save_image.
Raster<unsigned char> quantize(const Image& img);

/// Same as a save/load round trip.
Image quantized(const Image& img);

} // namespace despeckle
