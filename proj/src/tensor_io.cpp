#include "tsekit/tensor_io.hpp"

#include <cstring>
#include <fstream>

namespace tsekit {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'E', '1'};
constexpr std::uint32_t kRank = 4;
constexpr std::int64_t kMaxElements = std::int64_t(1) << 31;

void put_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                           char((v >> 24) & 0xff)};
    out.write(bytes, 4);
}

void put_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() != 4) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
    return std::uint32_t(bytes[0]) | (std::uint32_t(bytes[1]) << 8) |
           (std::uint32_t(bytes[2]) << 16) | (std::uint32_t(bytes[3]) << 24);
}

float get_f32(std::istream& in, const char* what) {
    const std::uint32_t bits = get_u32(in, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void write_record(std::ostream& out, const Tensor4D& x) {
    out.write(kMagic, 4);
    put_u32(out, kRank);
    put_u32(out, std::uint32_t(x.n));
    put_u32(out, std::uint32_t(x.c));
    put_u32(out, std::uint32_t(x.h));
    put_u32(out, std::uint32_t(x.w));
    for (float v : x.data) put_f32(out, v);
}

Tensor4D read_record(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4) throw FormatError("truncated file while reading magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("bad magic, not a tensor file");
    }
    const std::uint32_t rank = get_u32(in, "rank");
    if (rank != kRank) {
        throw FormatError("unsupported rank " + std::to_string(rank) + ", expected 4");
    }
    std::uint32_t dims[4];
    for (int i = 0; i < 4; ++i) dims[i] = get_u32(in, "dims");
    std::int64_t total = 1;
    for (std::uint32_t d : dims) {
        if (d == 0) throw FormatError("zero dimension in tensor header");
        total *= d;
        if (total > kMaxElements) {
            throw FormatError("tensor dims overflow the supported element count");
        }
    }
    Tensor4D x{int(dims[0]), int(dims[1]), int(dims[2]), int(dims[3])};
    for (std::int64_t i = 0; i < total; ++i) {
        x.data[size_t(i)] = get_f32(in, "payload");
    }
    return x;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open file: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open file for writing: " + path);
    return out;
}

void check_written(std::ostream& out, const std::string& path) {
    if (!out.good()) throw std::ios_base::failure("failed writing file: " + path);
}

Tensor4D conv_to_tensor(const Conv2d& layer) {
    return Tensor4D::from_values(layer.c_out, layer.c_in, layer.kh, layer.kw, layer.weight);
}

Tensor4D bias_to_tensor(const std::vector<float>& bias) {
    return Tensor4D::from_values(1, int(bias.size()), 1, 1, bias);
}

}  // namespace

void write_tensor(const Tensor4D& x, const std::string& path) {
    auto out = open_out(path);
    write_record(out, x);
    check_written(out, path);
}

Tensor4D read_tensor(const std::string& path) {
    auto in = open_in(path);
    Tensor4D x = read_record(in);
    // Trailing bytes mean the file is not a single tensor.
    in.peek();
    if (!in.eof()) throw FormatError("trailing bytes after tensor payload");
    return x;
}

void write_weights(const ExciteWeights& w, const std::string& path) {
    w.validate();
    auto out = open_out(path);
    put_u32(out, 4);
    write_record(out, conv_to_tensor(w.reduce));
    write_record(out, bias_to_tensor(w.reduce.bias));
    write_record(out, conv_to_tensor(w.expand));
    write_record(out, bias_to_tensor(w.expand.bias));
    check_written(out, path);
}

ExciteWeights read_weights(const std::string& path) {
    auto in = open_in(path);
    const std::uint32_t count = get_u32(in, "record count");
    if (count != 4) {
        throw FormatError("weight file must hold 4 records (w1, b1, w2, b2), found " +
                          std::to_string(count));
    }
    const Tensor4D w1 = read_record(in);
    const Tensor4D b1 = read_record(in);
    const Tensor4D w2 = read_record(in);
    const Tensor4D b2 = read_record(in);
    ExciteWeights w;
    w.reduce.c_out = w1.n;
    w.reduce.c_in = w1.c;
    w.reduce.kh = w1.h;
    w.reduce.kw = w1.w;
    w.reduce.weight = w1.data;
    w.reduce.bias = b1.data;
    w.expand.c_out = w2.n;
    w.expand.c_in = w2.c;
    w.expand.kh = w2.h;
    w.expand.kw = w2.w;
    w.expand.weight = w2.data;
    w.expand.bias = b2.data;
    if (b1.c != w1.n || b1.n != 1 || b1.h != 1 || b1.w != 1 || b2.c != w2.n || b2.n != 1 ||
        b2.h != 1 || b2.w != 1) {
        throw FormatError("weight file: bias records do not match conv records");
    }
    try {
        w.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("weight file: ") + e.what());
    }
    return w;
}

}  // namespace tsekit
