#include "despeckle/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace despeckle {

namespace fs = std::filesystem;

namespace {

const char* kind_name(IoErrorKind kind)
{
    switch (kind) {
    case IoErrorKind::missing_file: return "missing file";
    case IoErrorKind::unsupported_format: return "unsupported format";
    case IoErrorKind::truncated_payload: return "truncated payload";
    case IoErrorKind::unwritable_path: return "unwritable path";
    }
    return "i/o error";
}

std::string lower_extension(const fs::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext;
}

Image from_bytes(const unsigned char* bytes, Index h, Index w)
{
    Image img(h, w);
    for (Index i = 0; i < h * w; ++i) {
        img.data()[i] = static_cast<float>(bytes[i]) / 255.0f;
    }
    return img;
}

// Skips whitespace and '#' comments, then reads a decimal header field.
bool read_pnm_field(std::istream& in, long& value)
{
    int ch = in.peek();
    while (ch != EOF) {
        if (ch == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (std::isspace(ch)) {
            in.get();
        } else {
            break;
        }
        ch = in.peek();
    }
    if (ch == EOF || !std::isdigit(ch)) {
        return false;
    }
    in >> value;
    return static_cast<bool>(in);
}

Image load_pgm(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ImageIoError(IoErrorKind::missing_file, path, "cannot open");
    }
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P') {
        throw ImageIoError(IoErrorKind::unsupported_format, path, "not a PGM/PNG file");
    }
    if (magic[1] != '5') {
        throw ImageIoError(IoErrorKind::unsupported_format, path,
                           std::string("unsupported PNM magic P") + magic[1] + " (only binary grayscale P5)");
    }
    long width = 0;
    long height = 0;
    long maxval = 0;
    if (!read_pnm_field(in, width) || !read_pnm_field(in, height) || !read_pnm_field(in, maxval)) {
        throw ImageIoError(IoErrorKind::truncated_payload, path, "incomplete P5 header");
    }
    if (width < 1 || height < 1) {
        throw ImageIoError(IoErrorKind::unsupported_format, path, "non-positive dimensions");
    }
    if (maxval != 255) {
        throw ImageIoError(IoErrorKind::unsupported_format, path,
                           "unsupported maxval " + std::to_string(maxval) + " (only 8-bit)");
    }
    // Exactly one whitespace byte separates the header from the payload.
    if (!std::isspace(in.get())) {
        throw ImageIoError(IoErrorKind::unsupported_format, path, "malformed P5 header");
    }
    const auto count = static_cast<std::streamsize>(width * height);
    std::vector<unsigned char> payload(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(payload.data()), count);
    if (in.gcount() != count) {
        std::ostringstream msg;
        msg << "expected " << count << " payload bytes, found " << in.gcount();
        throw ImageIoError(IoErrorKind::truncated_payload, path, msg.str());
    }
    return from_bytes(payload.data(), height, width);
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png(const fs::path& path)
{
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw ImageIoError(IoErrorKind::missing_file, path, "cannot open");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageIoError(IoErrorKind::unsupported_format, path, "libpng initialisation failed");
    }
    std::vector<unsigned char> pixels;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
    // libpng reports errors through longjmp; nothing with a destructor is created below this point.
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageIoError(IoErrorKind::truncated_payload, path, "corrupt or truncated PNG data");
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageIoError(IoErrorKind::unsupported_format, path, "only 8-bit grayscale PNG is supported");
    }
    pixels.resize(static_cast<std::size_t>(width) * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 r = 0; r < height; ++r) {
        rows[r] = pixels.data() + static_cast<std::size_t>(r) * width;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_bytes(pixels.data(), static_cast<Index>(height), static_cast<Index>(width));
}

void save_pgm(const Raster<unsigned char>& bytes, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ImageIoError(IoErrorKind::unwritable_path, path, "cannot open for writing");
    }
    out << "P5\n" << bytes.cols() << ' ' << bytes.rows() << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ImageIoError(IoErrorKind::unwritable_path, path, "write failed");
    }
}

void save_png(const Raster<unsigned char>& bytes, const fs::path& path)
{
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw ImageIoError(IoErrorKind::unwritable_path, path, "cannot open for writing");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw ImageIoError(IoErrorKind::unwritable_path, path, "libpng initialisation failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(bytes.rows()));
    for (Index r = 0; r < bytes.rows(); ++r) {
        rows[static_cast<std::size_t>(r)] = const_cast<png_bytep>(bytes.data() + r * bytes.cols());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ImageIoError(IoErrorKind::unwritable_path, path, "PNG encoding failed");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(bytes.cols()), static_cast<png_uint_32>(bytes.rows()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

ImageIoError::ImageIoError(IoErrorKind kind, const fs::path& path, const std::string& detail)
    : std::runtime_error(path.string() + ": " + kind_name(kind) + ": " + detail)
    , kind_(kind)
    , path_(path)
{
}

Image load_image(const fs::path& path)
{
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        throw ImageIoError(IoErrorKind::missing_file, path, "no such file");
    }
    std::ifstream probe(path, std::ios::binary);
    unsigned char signature[8] = {};
    probe.read(reinterpret_cast<char*>(signature), 8);
    if (probe.gcount() == 8 && png_sig_cmp(signature, 0, 8) == 0) {
        return load_png(path);
    }
    return load_pgm(path);
}

Raster<unsigned char> quantize(const Image& img)
{
    Raster<unsigned char> bytes(img.rows(), img.cols());
    for (Index i = 0; i < img.size(); ++i) {
        const double v = std::clamp(static_cast<double>(img.data()[i]), 0.0, 1.0);
        bytes.data()[i] = static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
    }
    return bytes;
}

Image quantized(const Image& img)
{
    const Raster<unsigned char> bytes = quantize(img);
    return from_bytes(bytes.data(), bytes.rows(), bytes.cols());
}

void save_image(const Image& img, const fs::path& path)
{
    validate(img);
    const Raster<unsigned char> bytes = quantize(img);
    if (lower_extension(path) == ".png") {
        save_png(bytes, path);
    } else {
        save_pgm(bytes, path);
    }
}

} // namespace despeckle
