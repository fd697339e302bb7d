#include "echogan/dataio/image_io.hpp"

#include <openssl/evp.h>
#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace echogan::dataio {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

GrayImage8 decode_pgm(std::string_view bytes, const std::string& where) {
    std::istringstream in{std::string(bytes)};
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError(where + ": not a binary PGM (P5) file");

    auto next_int = [&]() {
        int value = 0;
        while (in >> std::ws && in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
        }
        if (!(in >> value)) throw IoError(where + ": truncated PGM header");
        return value;
    };
    const int width = next_int();
    const int height = next_int();
    const int maxval = next_int();
    in.get();  // single whitespace before the payload
    if (width <= 0 || height <= 0) throw InvalidDimensions(where + ": empty PGM");
    if (maxval <= 0 || maxval > 255) throw IoError(where + ": only 8-bit PGM is supported");

    GrayImage8 image(height, width);
    in.read(reinterpret_cast<char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(image.pixels.size())) {
        throw IoError(where + ": truncated PGM payload");
    }
    return image;
}

std::string encode_pgm(const GrayImage8& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

}  // namespace

std::string read_file(const fs::path& path) {
    if (!fs::exists(path)) throw NotFound("file not found: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

GrayImage8 decode_png(std::string_view bytes) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw IoError(std::string("PNG decode failed: ") + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        throw InvalidDimensions("PNG has zero extent");
    }
    GrayImage8 out(static_cast<int>(image.height), static_cast<int>(image.width));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw IoError("PNG decode failed: " + message);
    }
    return out;
}

std::string encode_png(const GrayImage8& image) {
    if (image.width <= 0 || image.height <= 0) throw InvalidDimensions("cannot encode empty image");
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
        throw IoError(std::string("PNG encode failed: ") + png.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
        throw IoError(std::string("PNG encode failed: ") + png.message);
    }
    out.resize(size);
    return out;
}

GrayImage8 read_metaimage(const fs::path& header_path) {
    const std::string text = read_file(header_path);
    const std::string where = header_path.string();

    std::map<std::string, std::string> fields;
    std::size_t pos = 0;
    std::size_t payload_offset = std::string::npos;
    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
        pos = eol == std::string::npos ? text.size() : eol + 1;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        fields[key] = trim(line.substr(eq + 1));
        if (key == "ElementDataFile") {
            payload_offset = pos;
            break;
        }
    }

    const auto field = [&](const std::string& key) -> const std::string& {
        const auto it = fields.find(key);
        if (it == fields.end()) throw IoError(where + ": missing MetaImage field " + key);
        return it->second;
    };

    std::istringstream dims(field("DimSize"));
    std::vector<int> extents;
    for (int d; dims >> d;) extents.push_back(d);
    if (extents.size() < 2) throw IoError(where + ": DimSize needs at least two extents");
    for (std::size_t i = 2; i < extents.size(); ++i) {
        if (extents[i] != 1) throw IoError(where + ": only single-frame MetaImages are supported");
    }
    const int width = extents[0];
    const int height = extents[1];
    if (width <= 0 || height <= 0) throw InvalidDimensions(where + ": empty MetaImage");

    const std::string type = field("ElementType");
    if (type != "MET_UCHAR" && type != "MET_CHAR") {
        throw IoError(where + ": unsupported ElementType " + type);
    }

    const std::string data_file = field("ElementDataFile");
    std::string payload = data_file == "LOCAL"
                              ? text.substr(payload_offset)
                              : read_file(header_path.parent_path() / data_file);

    GrayImage8 image(height, width);
    const auto compressed = fields.find("CompressedData");
    if (compressed != fields.end() && (compressed->second == "True" || compressed->second == "true")) {
        uLongf length = static_cast<uLongf>(image.pixels.size());
        const int rc = uncompress(image.pixels.data(), &length,
                                  reinterpret_cast<const Bytef*>(payload.data()),
                                  static_cast<uLong>(payload.size()));
        if (rc != Z_OK || length != image.pixels.size()) {
            throw IoError(where + ": corrupt compressed payload");
        }
    } else {
        if (payload.size() < image.pixels.size()) throw IoError(where + ": truncated payload");
        std::copy_n(payload.data(), image.pixels.size(), reinterpret_cast<char*>(image.pixels.data()));
    }
    return image;
}

GrayImage8 read_gray_image(const fs::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".mhd" || ext == ".mha") return read_metaimage(path);
    const std::string bytes = read_file(path);
    if (ext == ".pgm") return decode_pgm(bytes, path.string());
    try {
        return decode_png(bytes);
    } catch (const InvalidDimensions&) {
        throw;
    } catch (const Error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_gray_image(const fs::path& path, const GrayImage8& image) {
    const std::string ext = lower_extension(path);
    if (ext == ".pgm") {
        write_file(path, encode_pgm(image));
    } else if (ext == ".png") {
        write_file(path, encode_png(image));
    } else {
        throw IoError("unsupported output format: " + path.string());
    }
}

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text) {
    std::string clean;
    clean.reserve(text.size());
    for (const char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
    }
    if (clean.size() % 4 != 0) throw IoError("base64 length is not a multiple of 4");
    if (clean.empty()) return {};

    std::string out(clean.size() / 4 * 3, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(clean.data()),
                                  static_cast<int>(clean.size()));
    if (n < 0) throw IoError("malformed base64 payload");
    std::size_t padding = 0;
    if (clean.back() == '=') ++padding;
    if (clean.size() >= 2 && clean[clean.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

EchoFrame to_echo_frame(const GrayImage8& image) {
    EchoFrame frame(image.height, image.width);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        frame.pixels[i] = static_cast<float>(image.pixels[i]) / 255.0f;
    }
    return frame;
}

GrayImage8 quantize(const EchoFrame& frame) {
    GrayImage8 image(frame.height, frame.width);
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        const double v = std::clamp(static_cast<double>(frame.pixels[i]), 0.0, 1.0);
        image.pixels[i] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
    }
    return image;
}

}  // namespace echogan::dataio
