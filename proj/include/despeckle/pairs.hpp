#pragma once

#include "despeckle/wnnm.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace despeckle {

/// Training pairs for the learned surrogate.
///
/// Layout under output_dir:
///   raw/<name>      input image (byte copy, or speckled copy when sigma is set)
///   target/<name>   denoised raw image, same format as <name>
///   manifest.csv    one row per pair, see kManifestHeader
struct PairOptions {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    Method method = Method::tuned_wnnm;
    Intensity intensity = Intensity::mid;
    WnnmParams params = method_preset(Method::tuned_wnnm, Intensity::mid);
    /// When set, raw images are synthesised with this speckle intensity.
    std::optional<double> sigma;
    std::uint64_t seed = 0;
    int threads = 0;
    bool force = false;
    bool resume = false;
};

inline constexpr const char* kManifestHeader =
    "name,raw,target,height,width,method,intensity,nsig,sigma,seed,raw_crc32,target_crc32";

struct ManifestRow {
    std::string name;
    std::string raw;
    std::string target;
    Index height = 0;
    Index width = 0;
    std::string method;
    std::string intensity;
    double nsig = 0.0;
    std::string sigma;  // empty when raw images are byte copies
    std::uint64_t seed = 0;
    std::string raw_crc32;
    std::string target_crc32;
};

struct PairSummary {
    std::size_t written = 0;
    std::size_t resumed = 0;
    std::vector<ManifestRow> rows;
};

class PairError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CRC-32 (IEEE 802.3, as in zlib) of a file, as 8 lowercase hex digits.
std::string file_crc32(const std::filesystem::path& path);

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestRow>& rows, const std::filesystem::path& path);

/// Throws PairError on output collisions (unless force or resume) and when the
/// input directory holds no file.
PairSummary generate_pairs(const PairOptions& options);

} // namespace despeckle
