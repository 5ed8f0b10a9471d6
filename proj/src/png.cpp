#include <png.h>

#include <csetjmp>
#include <cstring>

#include "slideeval/renderer.hpp"

namespace slideeval {

namespace {

// 72 dpi expressed in pixels per metre.
constexpr png_uint_32 kPixelsPerMetre = 2835;

struct WriteSink {
    std::string* out;
};

void write_cb(png_structp png, png_bytep data, png_size_t n) {
    auto* sink = static_cast<WriteSink*>(png_get_io_ptr(png));
    sink->out->append(reinterpret_cast<const char*>(data), n);
}

void flush_cb(png_structp) {}

struct ReadSource {
    const unsigned char* data;
    std::size_t size;
    std::size_t pos;
};

void read_cb(png_structp png, png_bytep out, png_size_t n) {
    auto* src = static_cast<ReadSource*>(png_get_io_ptr(png));
    if (src->size - src->pos < n) png_error(png, "truncated PNG");
    std::memcpy(out, src->data + src->pos, n);
    src->pos += n;
}

void warn_cb(png_structp, png_const_charp) {}

// Kept free of non-trivial locals so longjmp never skips a destructor.
bool encode_raw(const RasterImage& img, std::string* out) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, warn_cb);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    WriteSink sink{out};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &sink, write_cb, flush_cb);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_pHYs(png, info, kPixelsPerMetre, kPixelsPerMetre, PNG_RESOLUTION_METER);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

bool decode_raw(ReadSource* src, RasterImage* img, std::vector<png_bytep>* rows) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, warn_cb);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, src, read_cb);
    png_read_info(png, info);
    const png_byte color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (png_get_bit_depth(png, info) < 8) png_set_expand(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_color_16 white{};
    white.red = white.green = white.blue = 255;
    png_set_background(png, &white, PNG_BACKGROUND_GAMMA_SCREEN, 0, 1.0);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    const png_uint_32 w = png_get_image_width(png, info), h = png_get_image_height(png, info);
    if (png_get_channels(png, info) != 3 || w == 0 || h == 0 || w > 20000 || h > 20000) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    img->width = static_cast<int>(w);
    img->height = static_cast<int>(h);
    img->pixels.resize(static_cast<std::size_t>(w) * h * 3);
    rows->resize(h);
    for (png_uint_32 y = 0; y < h; ++y) (*rows)[y] = img->pixels.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows->data());
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

}  // namespace

std::string encode_png(const RasterImage& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
        throw PngError("image buffer does not match its dimensions");
    }
    std::string out;
    if (!encode_raw(image, &out)) throw PngError("PNG encoding failed");
    return out;
}

RasterImage decode_png(std::string_view bytes) {
    ReadSource src{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0};
    if (bytes.size() < 8 || png_sig_cmp(src.data, 0, 8) != 0) throw PngError("not a PNG");
    RasterImage img;
    std::vector<png_bytep> rows;
    if (!decode_raw(&src, &img, &rows)) throw PngError("PNG decoding failed");
    return img;
}

}  // namespace slideeval
