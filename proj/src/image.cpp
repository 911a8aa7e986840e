#include "lftag/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace lftag {
namespace {

std::string lower_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// Skips whitespace and '#' comments between PNM header tokens.
int read_pnm_int(std::istream& in) {
    int c = in.peek();
    while (c != EOF) {
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else {
            break;
        }
        c = in.peek();
    }
    int value = -1;
    if (!(in >> value)) throw ImageIoError("malformed PGM header");
    return value;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open " + path.string());
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5" && magic != "P2") throw ImageIoError("not a PGM file: " + path.string());
    const int w = read_pnm_int(in);
    const int h = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw ImageIoError("bad PGM header");

    GrayImage img(w, h);
    if (magic == "P2") {
        for (auto& px : img.data) {
            int v = read_pnm_int(in);
            px = static_cast<std::uint8_t>(std::lround(255.0 * v / maxval));
        }
        return img;
    }
    in.get();  // single whitespace after maxval
    if (maxval < 256) {
        in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
        if (in.gcount() != static_cast<std::streamsize>(img.size())) throw ImageIoError("truncated PGM");
        if (maxval != 255) {
            for (auto& px : img.data) px = static_cast<std::uint8_t>(std::lround(255.0 * px / maxval));
        }
    } else {
        std::vector<unsigned char> buf(img.size() * 2);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw ImageIoError("truncated PGM");
        for (std::size_t i = 0; i < img.size(); ++i) {
            int v = (buf[2 * i] << 8) | buf[2 * i + 1];
            img.data[i] = static_cast<std::uint8_t>(std::lround(255.0 * v / maxval));
        }
    }
    return img;
}

}  // namespace

std::uint8_t rec601_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

GrayImage read_image(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw ImageIoError("cannot open " + path.string());
    if (lower_extension(path) == ".pgm") return read_pgm(path);

    cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (m.empty()) throw ImageIoError("cannot decode " + path.string());
    if (m.depth() == CV_16U) m.convertTo(m, CV_8U, 1.0 / 257.0);
    if (m.depth() != CV_8U) throw ImageIoError("unsupported pixel depth in " + path.string());

    GrayImage img(m.cols, m.rows);
    const int ch = m.channels();
    for (int y = 0; y < m.rows; ++y) {
        const std::uint8_t* src = m.ptr<std::uint8_t>(y);
        std::uint8_t* dst = img.row(y);
        for (int x = 0; x < m.cols; ++x) {
            if (ch == 1 || ch == 2) {
                dst[x] = src[x * ch];
            } else {
                // codec order is BGR(A)
                dst[x] = rec601_luma(src[x * ch + 2], src[x * ch + 1], src[x * ch]);
            }
        }
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError("cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
    if (!out) throw ImageIoError("write failed: " + path.string());
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
    cv::Mat m(img.height, img.width, CV_8UC1, const_cast<std::uint8_t*>(img.data.data()));
    if (!cv::imwrite(path.string(), m)) throw ImageIoError("cannot write " + path.string());
}

void write_image(const std::filesystem::path& path, const GrayImage& img) {
    if (lower_extension(path) == ".pgm") {
        write_pgm(path, img);
    } else {
        write_png(path, img);
    }
}

}  // namespace lftag
