#include "anomorph/nifti_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "anomorph/errors.hpp"

namespace anomorph {

namespace {

#pragma pack(push, 1)
struct Nifti1Header {
    int32_t sizeof_hdr;     // 0: must be 348
    char data_type[10];     // 4
    char db_name[18];       // 14
    int32_t extents;        // 32
    int16_t session_error;  // 36
    char regular;           // 38
    char dim_info;          // 39
    int16_t dim[8];         // 40
    float intent_p1;        // 56
    float intent_p2;        // 60
    float intent_p3;        // 64
    int16_t intent_code;    // 68
    int16_t datatype;       // 70
    int16_t bitpix;         // 72
    int16_t slice_start;    // 74
    float pixdim[8];        // 76
    float vox_offset;       // 108
    float scl_slope;        // 112
    float scl_inter;        // 116
    int16_t slice_end;      // 120
    char slice_code;        // 122
    char xyzt_units;        // 123
    float cal_max;          // 124
    float cal_min;          // 128
    float slice_duration;   // 132
    float toffset;          // 136
    int32_t glmax;          // 140
    int32_t glmin;          // 144
    char descrip[80];       // 148
    char aux_file[24];      // 228
    int16_t qform_code;     // 252
    int16_t sform_code;     // 254
    float quatern_b;        // 256
    float quatern_c;        // 260
    float quatern_d;        // 264
    float qoffset_x;        // 268
    float qoffset_y;        // 272
    float qoffset_z;        // 276
    float srow_x[4];        // 280
    float srow_y[4];        // 296
    float srow_z[4];        // 312
    char intent_name[16];   // 328
    char magic[4];          // 344
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

constexpr int16_t kDtInt16 = 4;
constexpr int16_t kDtFloat32 = 16;

} // namespace

Volume load_nifti(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open NIfTI file: " + path);
    Nifti1Header h{};
    f.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (!f) throw validation_error("truncated NIfTI header: " + path);
    if (h.sizeof_hdr != 348)
        throw validation_error("not a NIfTI-1 file (sizeof_hdr != 348): " + path);
    if (std::memcmp(h.magic, "ni1", 3) == 0)
        throw validation_error("unsupported NIfTI variant (detached header \"ni1\"): " + path);
    if (std::memcmp(h.magic, "n+1", 3) != 0 || h.magic[3] != '\0')
        throw validation_error("not a single-file NIfTI-1 (magic != \"n+1\"): " + path);
    if (h.dim[0] != 3)
        throw validation_error("only 3D NIfTI supported, dim[0] = " +
                               std::to_string(h.dim[0]) + ": " + path);
    if (h.datatype != kDtInt16 && h.datatype != kDtFloat32)
        throw validation_error("unsupported datatype " + std::to_string(h.datatype) +
                               " (want int16 or float32): " + path);
    const int nx = h.dim[1], ny = h.dim[2], nz = h.dim[3];
    if (nx <= 0 || ny <= 0 || nz <= 0)
        throw validation_error("bad NIfTI dimensions: " + path);

    const long n = (long)nx * ny * nz;
    const long offset = (long)h.vox_offset;
    if (offset < (long)sizeof(Nifti1Header))
        throw validation_error("bad vox_offset: " + path);
    f.seekg(offset);

    NdArray a({nz, ny, nx});
    const bool scaled = h.scl_slope != 0.0f;
    const float slope = scaled ? h.scl_slope : 1.0f;
    const float inter = scaled ? h.scl_inter : 0.0f;
    if (h.datatype == kDtFloat32) {
        f.read(reinterpret_cast<char*>(a.data()), (std::streamsize)n * 4);
        if (!f) throw validation_error("truncated NIfTI payload: " + path);
        if (scaled)
            for (long i = 0; i < n; ++i) a.data()[i] = slope * a.data()[i] + inter;
    } else {
        std::vector<int16_t> raw((size_t)n);
        f.read(reinterpret_cast<char*>(raw.data()), (std::streamsize)n * 2);
        if (!f) throw validation_error("truncated NIfTI payload: " + path);
        for (long i = 0; i < n; ++i) a.data()[i] = slope * (float)raw[(size_t)i] + inter;
    }
    if (!a.all_finite()) throw validation_error("non-finite values in NIfTI: " + path);
    return Volume(std::move(a), {h.pixdim[3], h.pixdim[2], h.pixdim[1]});
}

void save_nifti(const Volume& v, const std::string& path) {
    Nifti1Header h{};
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = 3;
    h.dim[1] = (int16_t)v.width();
    h.dim[2] = (int16_t)v.height();
    h.dim[3] = (int16_t)v.depth();
    for (int i = 4; i < 8; ++i) h.dim[i] = 1;
    h.datatype = kDtFloat32;
    h.bitpix = 32;
    h.pixdim[0] = 1.0f;
    h.pixdim[1] = v.spacing[2];
    h.pixdim[2] = v.spacing[1];
    h.pixdim[3] = v.spacing[0];
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    std::memcpy(h.magic, "n+1", 4);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write NIfTI file: " + path);
    f.write(reinterpret_cast<const char*>(&h), sizeof(h));
    const char pad[4] = {0, 0, 0, 0};
    f.write(pad, 4);
    f.write(reinterpret_cast<const char*>(v.data.data()),
            (std::streamsize)v.data.size() * 4);
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace anomorph
