// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/asset.hpp"

#include "nvo/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

namespace nvo {

static_assert(std::endian::native == std::endian::little, "asset IO assumes a little-endian host");

void Asset::validate() const {
    voxels.validate();
    if (flut.size() != voxels.size()) {
        throw ContractError(fmt::format("FLUT has {} entries for {} voxels", flut.size(), voxels.size()));
    }
    if (weights.size() != voxels.size()) {
        throw ContractError(fmt::format("skin weights cover {} voxels of {}", weights.size(), voxels.size()));
    }
    weights.validate(skeleton.size());
}

namespace {

constexpr char kMagic[4] = {'N', 'V', 'O', '1'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 8 + 1 + 1 + 6 * 4 + 8;
constexpr std::size_t kLeafSize = 8 + 4;

class Writer {
public:
    template <typename T>
    void put(T value) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void put_bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes.insert(bytes.end(), p, p + size);
    }
    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    template <typename T>
    T get(const char* what) {
        T value;
        need(sizeof(T), what);
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    void get_bytes(void* out, std::size_t size, const char* what) {
        need(size, what);
        std::memcpy(out, data_.data() + pos_, size);
        pos_ += size;
    }
    void need(std::size_t size, const char* what) const {
        if (size > data_.size() - pos_) {
            throw FormatError(FormatErrorKind::kTruncated,
                              fmt::format("asset truncated while reading {} at byte {} (size {})", what, pos_,
                                          data_.size()));
        }
    }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_asset(const Asset& asset) {
    if (asset.voxels.cells.empty()) {
        throw Error(ErrorCategory::kCarvedEmpty, "refusing to save an asset without voxels");
    }
    asset.validate();
    const std::size_t n = asset.voxels.size();
    Writer w;
    w.bytes.reserve(kHeaderSize + n * (kLeafSize + 4 * asset.flut.stride() + 7));
    w.put_bytes(kMagic, 4);
    w.put<std::uint32_t>(kAssetVersion);
    w.put<std::uint32_t>(asset.voxels.grid.resolution);
    w.put<std::uint64_t>(n);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(asset.flut.sh_degree()));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(asset.flut.channels()));
    const Aabb& b = asset.voxels.grid.bounds;
    for (const Vec3* v : {&b.lo, &b.hi}) {
        for (int a = 0; a < 3; ++a) {
            w.put<float>(static_cast<float>((*v)[a]));
        }
    }
    const std::size_t rig_offset = kHeaderSize + n * kLeafSize + n * asset.flut.stride() * sizeof(float);
    w.put<std::uint64_t>(rig_offset);

    struct OctreeLeafRecord {
        std::uint64_t morton;
        std::uint32_t flut_index;
    };
    std::vector<OctreeLeafRecord> leaves;
    leaves.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        leaves.push_back({morton_encode(asset.voxels.cells[i]), static_cast<std::uint32_t>(i)});
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const OctreeLeafRecord& a, const OctreeLeafRecord& b) { return a.morton < b.morton; });
    for (const OctreeLeafRecord& leaf : leaves) {
        w.put<std::uint64_t>(leaf.morton);
        w.put<std::uint32_t>(leaf.flut_index);
    }
    const auto flut = asset.flut.data();
    w.put_bytes(flut.data(), flut.size() * sizeof(float));

    w.put<std::uint16_t>(static_cast<std::uint16_t>(asset.skeleton.size()));
    for (const Joint& joint : asset.skeleton.joints()) {
        if (joint.name.size() > 0xffff) {
            throw ContractError("joint name longer than 65535 bytes");
        }
        w.put<std::uint16_t>(static_cast<std::uint16_t>(joint.name.size()));
        w.put_bytes(joint.name.data(), joint.name.size());
        w.put<std::int32_t>(joint.parent);
        const Quat& q = joint.bind_local.rotation();
        w.put<double>(q.w());
        w.put<double>(q.x());
        w.put<double>(q.y());
        w.put<double>(q.z());
        for (int a = 0; a < 3; ++a) {
            w.put<double>(joint.bind_local.translation()[a]);
        }
    }
    w.put<std::uint64_t>(asset.weights.size());
    for (std::size_t i = 0; i < asset.weights.size(); ++i) {
        const auto list = asset.weights.of(i);
        if (list.size() > 0xff) {
            throw ContractError("a voxel has more than 255 skin weights");
        }
        w.put<std::uint8_t>(static_cast<std::uint8_t>(list.size()));
        for (const JointWeight& jw : list) {
            w.put<std::uint16_t>(jw.joint);
            w.put<float>(jw.weight);
        }
    }
    return std::move(w.bytes);
}

Asset load_asset(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    char magic[4];
    r.get_bytes(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError(FormatErrorKind::kBadMagic, "not an nvo asset (magic mismatch)");
    }
    const auto version = r.get<std::uint32_t>("version");
    if (version != kAssetVersion) {
        throw FormatError(FormatErrorKind::kUnsupportedVersion,
                          fmt::format("asset version {} is not supported (expected {})", version, kAssetVersion));
    }
    Asset asset;
    asset.voxels.grid.resolution = r.get<std::uint32_t>("resolution");
    const auto count = r.get<std::uint64_t>("voxel count");
    const int degree = r.get<std::uint8_t>("SH degree");
    const int channels = r.get<std::uint8_t>("channels");
    float bounds[6];
    for (float& v : bounds) {
        v = r.get<float>("bounds");
    }
    asset.voxels.grid.bounds = {Vec3(bounds[0], bounds[1], bounds[2]), Vec3(bounds[3], bounds[4], bounds[5])};
    const auto rig_offset = r.get<std::uint64_t>("rig offset");

    try {
        asset.voxels.grid.validate();
    } catch (const ContractError& e) {
        throw FormatError(FormatErrorKind::kCorrupt, fmt::format("invalid grid in asset header: {}", e.what()));
    }
    if (count == 0) {
        throw FormatError(FormatErrorKind::kCountMismatch, "asset declares zero voxels");
    }
    if (degree > kMaxShDegree || channels < 1 || channels > kMaxChannels) {
        throw FormatError(FormatErrorKind::kCorrupt,
                          fmt::format("unsupported SH degree {} or channel count {}", degree, channels));
    }
    const std::size_t stride = static_cast<std::size_t>(sh_basis_count(degree)) * channels + 1;
    // Guard the size arithmetic before any allocation.
    if (count > bytes.size() / kLeafSize) {
        throw FormatError(FormatErrorKind::kTruncated,
                          fmt::format("asset declares {} voxels but holds only {} bytes", count, bytes.size()));
    }
    const std::size_t expected_rig = kHeaderSize + count * kLeafSize + count * stride * sizeof(float);
    if (rig_offset != expected_rig) {
        throw FormatError(FormatErrorKind::kCountMismatch,
                          fmt::format("rig block offset {} does not match {} voxels (expected {})", rig_offset,
                                      count, expected_rig));
    }
    r.need(expected_rig - kHeaderSize, "leaf table and FLUT");

    asset.voxels.cells.resize(count);
    std::vector<std::uint8_t> seen(count, 0);
    std::uint64_t previous = 0;
    for (std::uint64_t l = 0; l < count; ++l) {
        const auto morton = r.get<std::uint64_t>("leaf");
        const auto index = r.get<std::uint32_t>("leaf");
        if (l > 0 && morton <= previous) {
            throw FormatError(FormatErrorKind::kCorrupt, fmt::format("leaf table not strictly sorted at {}", l));
        }
        previous = morton;
        if (index >= count || seen[index]) {
            throw FormatError(FormatErrorKind::kCorrupt, fmt::format("leaf {} has an invalid FLUT index {}", l, index));
        }
        seen[index] = 1;
        const GridCoord cell = morton_decode(morton);
        if (!asset.voxels.grid.contains(cell) || morton_encode_unchecked(cell.i, cell.j, cell.k) != morton) {
            throw FormatError(FormatErrorKind::kCorrupt, fmt::format("leaf {} lies outside the grid", l));
        }
        asset.voxels.cells[index] = cell;
    }
    asset.flut = Flut(count, degree, channels);
    auto flut = asset.flut.data();
    r.get_bytes(flut.data(), flut.size() * sizeof(float), "FLUT");

    const auto joint_count = r.get<std::uint16_t>("joint count");
    if (joint_count == 0) {
        throw FormatError(FormatErrorKind::kCorrupt, "rig has no joints");
    }
    std::vector<Joint> joints(joint_count);
    for (Joint& joint : joints) {
        const auto name_length = r.get<std::uint16_t>("joint name length");
        joint.name.resize(name_length);
        r.get_bytes(joint.name.data(), name_length, "joint name");
        joint.parent = r.get<std::int32_t>("joint parent");
        double q[4], t[3];
        for (double& v : q) {
            v = r.get<double>("joint rotation");
        }
        for (double& v : t) {
            v = r.get<double>("joint translation");
        }
        try {
            joint.bind_local = RigidTransform(Quat(q[0], q[1], q[2], q[3]), Vec3(t[0], t[1], t[2]));
        } catch (const ContractError& e) {
            throw FormatError(FormatErrorKind::kCorrupt, fmt::format("joint '{}': {}", joint.name, e.what()));
        }
    }
    try {
        asset.skeleton = Skeleton(std::move(joints));
    } catch (const ContractError& e) {
        throw FormatError(FormatErrorKind::kCorrupt, fmt::format("invalid skeleton: {}", e.what()));
    }
    const auto weight_count = r.get<std::uint64_t>("weight count");
    if (weight_count != count) {
        throw FormatError(FormatErrorKind::kCountMismatch,
                          fmt::format("rig block holds {} weight lists for {} voxels", weight_count, count));
    }
    std::vector<std::vector<JointWeight>> per_voxel(count);
    for (auto& list : per_voxel) {
        const int n = r.get<std::uint8_t>("weight list");
        list.resize(n);
        for (JointWeight& jw : list) {
            jw.joint = r.get<std::uint16_t>("weight joint");
            jw.weight = r.get<float>("weight value");
        }
    }
    asset.weights = SkinWeights(per_voxel);
    if (r.remaining() != 0) {
        throw FormatError(FormatErrorKind::kTrailingData,
                          fmt::format("{} unexpected bytes after the rig block", r.remaining()));
    }
    try {
        asset.weights.validate(asset.skeleton.size());
    } catch (const ContractError& e) {
        throw FormatError(FormatErrorKind::kCorrupt, fmt::format("invalid skin weights: {}", e.what()));
    }
    return asset;
}

void save_asset_file(const Asset& asset, const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = save_asset(asset);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCategory::kIo, fmt::format("cannot open '{}' for writing", path.string()));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCategory::kIo, fmt::format("failed writing '{}'", path.string()));
    }
}

Asset load_asset_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCategory::kIo, fmt::format("cannot open '{}'", path.string()));
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_asset(bytes);
}

std::string asset_id(std::span<const std::uint8_t> bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const std::uint8_t b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", hash);
}

}  // namespace nvo
