#ifndef DEGCRAFT_IMAGE_IO_HPP
#define DEGCRAFT_IMAGE_IO_HPP

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "degcraft/errors.hpp"
#include "degcraft/image.hpp"

namespace degcraft {

// round half away from zero, clamp to 8 bits
inline unsigned char quantize8(double v) {
    v = std::clamp(v, 0.0, 255.0);
    return static_cast<unsigned char>(std::floor(v + 0.5));
}

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline Image from_interleaved8(const unsigned char* buf, int w, int h, int ch) {
    Image img(w, h, ch);
    for (int c = 0; c < ch; ++c) {
        double* plane = img.plane(c);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                plane[static_cast<std::size_t>(y) * w + x] =
                    static_cast<double>(buf[(static_cast<std::size_t>(y) * w + x) * ch + c]);
    }
    return img;
}

inline std::vector<unsigned char> to_interleaved8(const Image& img) {
    std::vector<unsigned char> buf(img.pixel_count() * img.channels);
    for (int c = 0; c < img.channels; ++c) {
        const double* plane = img.plane(c);
        for (std::size_t i = 0; i < img.pixel_count(); ++i)
            buf[i * img.channels + c] = quantize8(plane[i]);
    }
    return buf;
}

// libjpeg error handler that longjmps instead of calling exit()
struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

inline Image decode_jpeg_mem(const unsigned char* bytes, std::size_t n,
                             const std::string& what) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw io_error("JPEG decode failed (" + what + "): " + jerr.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, const_cast<unsigned char*>(bytes),
                 static_cast<unsigned long>(n));
    jpeg_read_header(&cinfo, TRUE);
    jpeg_start_decompress(&cinfo);
    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    const int ch = cinfo.output_components;
    if (ch != 1 && ch != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw io_error("JPEG decode failed (" + what + "): unsupported component count");
    }
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * ch);
    while (cinfo.output_scanline < cinfo.output_height) {
        unsigned char* row = buf.data() +
            static_cast<std::size_t>(cinfo.output_scanline) * w * ch;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_interleaved8(buf.data(), w, h, ch);
}

// baseline JFIF encode: RGB -> YCbCr with 4:2:0 subsampling for color input,
// Annex-K tables scaled by the conventional quality rule (force_baseline)
inline std::vector<unsigned char> encode_jpeg_mem(const Image& img, int quality) {
    if (quality < 1 || quality > 100)
        throw validation_error("JPEG quality must be in 1..100");
    if (img.channels != 1 && img.channels != 3)
        throw validation_error("JPEG encode requires 1 or 3 channels");
    const std::vector<unsigned char> buf = to_interleaved8(img);

    jpeg_compress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    unsigned char* out_buf = nullptr;
    unsigned long out_size = 0;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_compress(&cinfo);
        if (out_buf) std::free(out_buf);
        throw io_error(std::string("JPEG encode failed: ") + jerr.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &out_buf, &out_size);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = img.channels;
    cinfo.in_color_space = img.channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);           // defaults give 4:2:0 chroma sampling for YCbCr
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        const unsigned char* row = buf.data() +
            static_cast<std::size_t>(cinfo.next_scanline) * img.width * img.channels;
        JSAMPROW rows[1] = {const_cast<unsigned char*>(row)};
        jpeg_write_scanlines(&cinfo, rows, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::vector<unsigned char> result(out_buf, out_buf + out_size);
    std::free(out_buf);
    return result;
}

inline Image load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw io_error("cannot open file: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("libpng initialization failed for " + path);
    }
    std::vector<unsigned char> buf;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("PNG decode failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("unsupported 16-bit PNG: " + path);
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int ch = static_cast<int>(png_get_channels(png, info));
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("unsupported PNG channel layout: " + path);
    }
    buf.resize(static_cast<std::size_t>(w) * h * ch);
    rows.resize(h);
    for (int y = 0; y < h; ++y)
        rows[y] = buf.data() + static_cast<std::size_t>(y) * w * ch;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_interleaved8(buf.data(), w, h, ch);
}

inline void save_png(const Image& img, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw io_error("cannot open file for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw io_error("libpng initialization failed for " + path);
    }
    std::vector<unsigned char> buf = to_interleaved8(img);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = buf.data() + static_cast<std::size_t>(y) * img.width * img.channels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("PNG encode failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace detail

enum class ImageFormat { PNG, JPEG };

inline Image load_image(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw io_error("cannot open file: " + path);
    unsigned char magic[4] = {0, 0, 0, 0};
    const std::size_t got = std::fread(magic, 1, 4, fp.get());
    fp.reset();
    if (got >= 4 && magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' &&
        magic[3] == 'G')
        return detail::load_png(path);
    if (got >= 2 && magic[0] == 0xFF && magic[1] == 0xD8) {
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) throw io_error("cannot open file: " + path);
        std::fseek(f, 0, SEEK_END);
        const long n = std::ftell(f);
        std::fseek(f, 0, SEEK_SET);
        std::vector<unsigned char> bytes(static_cast<std::size_t>(n));
        const std::size_t rd = std::fread(bytes.data(), 1, bytes.size(), f);
        std::fclose(f);
        if (rd != bytes.size()) throw io_error("short read: " + path);
        return detail::decode_jpeg_mem(bytes.data(), bytes.size(), path);
    }
    throw io_error("unsupported image format (expected PNG or JPEG): " + path);
}

inline void save_image(const Image& img, const std::string& path,
                       ImageFormat format, int quality = 95) {
    if (img.width <= 0 || img.height <= 0 ||
        (img.channels != 1 && img.channels != 3))
        throw validation_error("save_image: invalid image");
    if (format == ImageFormat::PNG) {
        detail::save_png(img, path);
        return;
    }
    const std::vector<unsigned char> bytes = detail::encode_jpeg_mem(img, quality);
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw io_error("cannot open file for writing: " + path);
    if (std::fwrite(bytes.data(), 1, bytes.size(), fp.get()) != bytes.size())
        throw io_error("short write: " + path);
}

// All PNG/JPEG files in a directory, sorted by filename.
inline ImageSet load_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw io_error("not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw validation_error("no PNG/JPEG images in " + dir);
    ImageSet set;
    set.label = dir;
    for (const auto& p : paths) {
        set.items.push_back(load_image(p));
        set.item_labels.push_back(p);
    }
    return set;
}

} // namespace degcraft

#endif
