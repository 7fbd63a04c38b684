#include "despeckle/pairs.hpp"

#include "despeckle/bench.hpp"
#include "despeckle/image_io.hpp"
#include "despeckle/noise.hpp"

#include <boost/crc.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace despeckle {

namespace fs = std::filesystem;

std::string file_crc32(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PairError(path.string() + ": cannot open for checksum");
    }
    boost::crc_32_type crc;
    char buffer[1 << 16];
    while (in) {
        in.read(buffer, sizeof(buffer));
        crc.process_bytes(buffer, static_cast<std::size_t>(in.gcount()));
    }
    char hex[9];
    std::snprintf(hex, sizeof(hex), "%08x", static_cast<unsigned>(crc.checksum()));
    return hex;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

} // namespace

std::vector<ManifestRow> read_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw PairError(path.string() + ": cannot open manifest");
    }
    std::string line;
    if (!std::getline(in, line) || line != kManifestHeader) {
        throw PairError(path.string() + ": unexpected manifest header");
    }
    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 12) {
            throw PairError(path.string() + ": malformed manifest row '" + line + "'");
        }
        rows.push_back({f[0], f[1], f[2], std::stol(f[3]), std::stol(f[4]), f[5], f[6], std::stod(f[7]), f[8],
                        std::stoull(f[9]), f[10], f[11]});
    }
    return rows;
}

void write_manifest(const std::vector<ManifestRow>& rows, const fs::path& path)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw PairError(tmp.string() + ": cannot write manifest");
        }
        out << kManifestHeader << '\n';
        for (const ManifestRow& r : rows) {
            out << r.name << ',' << r.raw << ',' << r.target << ',' << r.height << ',' << r.width << ',' << r.method
                << ',' << r.intensity << ',' << format_metric(r.nsig) << ',' << r.sigma << ',' << r.seed << ','
                << r.raw_crc32 << ',' << r.target_crc32 << '\n';
        }
    }
    fs::rename(tmp, path);
}

namespace {

bool verifies(const ManifestRow& row, const fs::path& out_dir)
{
    const fs::path raw = out_dir / row.raw;
    const fs::path target = out_dir / row.target;
    return fs::is_regular_file(raw) && fs::is_regular_file(target) && file_crc32(raw) == row.raw_crc32
           && file_crc32(target) == row.target_crc32;
}

} // namespace

PairSummary generate_pairs(const PairOptions& options)
{
    options.params.validate();
    if (options.sigma && !(*options.sigma >= 0.0)) {
        throw PairError("sigma must be non-negative");
    }
    const std::vector<fs::path> inputs = list_dataset(options.input_dir);
    if (inputs.empty()) {
        throw PairError("input directory '" + options.input_dir.string() + "' is empty");
    }
    const fs::path raw_dir = options.output_dir / "raw";
    const fs::path target_dir = options.output_dir / "target";
    const fs::path manifest_path = options.output_dir / "manifest.csv";

    std::map<std::string, ManifestRow> previous;
    if (options.resume && fs::exists(manifest_path)) {
        for (ManifestRow& row : read_manifest(manifest_path)) {
            previous.emplace(row.name, std::move(row));
        }
    }
    if (!options.force && !options.resume) {
        for (const fs::path& input : inputs) {
            const fs::path name = input.filename();
            for (const fs::path& existing : {raw_dir / name, target_dir / name}) {
                if (fs::exists(existing)) {
                    throw PairError("output '" + existing.string()
                                    + "' already exists (use --force to overwrite or --resume to continue)");
                }
            }
        }
    }
    fs::create_directories(raw_dir);
    fs::create_directories(target_dir);

    PairSummary summary;
    for (std::size_t index = 0; index < inputs.size(); ++index) {
        const fs::path& input = inputs[index];
        const std::string name = input.filename().string();
        if (const auto it = previous.find(name); it != previous.end() && verifies(it->second, options.output_dir)) {
            summary.rows.push_back(it->second);
            ++summary.resumed;
            continue;
        }

        const fs::path raw_path = raw_dir / name;
        const fs::path target_path = target_dir / name;
        Image raw = load_image(input);
        if (options.sigma) {
            raw = add_speckle(raw, {*options.sigma, derive_seed(options.seed, index, 0)});
            save_image(raw, raw_path);
            raw = load_image(raw_path);
        } else {
            fs::copy_file(input, raw_path, fs::copy_options::overwrite_existing);
        }
        save_image(wnnm_denoise(raw, options.params, {.threads = options.threads, .on_iteration = {}}), target_path);

        ManifestRow row;
        row.name = name;
        row.raw = (fs::path("raw") / name).generic_string();
        row.target = (fs::path("target") / name).generic_string();
        row.height = raw.rows();
        row.width = raw.cols();
        row.method = to_string(options.method);
        row.intensity = to_string(options.intensity);
        row.nsig = options.params.nsig;
        row.sigma = options.sigma ? format_metric(*options.sigma) : "";
        row.seed = options.seed;
        row.raw_crc32 = file_crc32(raw_path);
        row.target_crc32 = file_crc32(target_path);
        summary.rows.push_back(row);
        ++summary.written;
        // Rewritten after every pair so an interrupted run can resume.
        write_manifest(summary.rows, manifest_path);
    }
    write_manifest(summary.rows, manifest_path);
    return summary;
}

} // namespace despeckle
