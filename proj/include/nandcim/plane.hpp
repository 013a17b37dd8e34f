#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "nandcim/cam.hpp"
#include "nandcim/cell.hpp"
#include "nandcim/common.hpp"
#include "nandcim/string_model.hpp"

namespace nandcim {

/// Physical organization of one plane. Strings are addressed by
/// (block, ssl, bitline); cells within a string by layer, match layers on
/// top of compute layers. Blocks pair up (2b, 2b+1) for differential
/// weight storage.
struct PlaneGeometry {
    int layers_total = 64;
    int ssls_per_gsl = 4;
    int num_blocks = 1024;
    int page_size = 131072;
    int cam_layers = 0;

    int cim_layers() const { return layers_total - cam_layers; }
    int block_pairs() const { return num_blocks / 2; }
    long long strings() const {
        return static_cast<long long>(num_blocks) * ssls_per_gsl * page_size;
    }
    long long cells() const { return strings() * layers_total; }

    void validate() const {
        if (layers_total < 1 || ssls_per_gsl < 1 || num_blocks < 1 || page_size < 1)
            throw UnsupportedConfigError("PlaneGeometry: all counts must be positive");
        if (cam_layers < 0 || cam_layers >= layers_total)
            throw UnsupportedConfigError("PlaneGeometry: cam_layers must be in [0, layers_total)");
        if ((num_blocks % 2) != 0)
            throw UnsupportedConfigError(
                "PlaneGeometry: num_blocks must be even (blocks pair up for signed weights)");
    }
};

/// Programmed state of a plane: one threshold-state index per cell.
/// Match layers store identifier values (one value per cell, up to
/// 2^width states); compute layers store weight-code levels. Mutable only
/// while programming; execution reads it concurrently.
class Plane {
public:
    Plane() = default;
    explicit Plane(const PlaneGeometry& g, std::vector<int> cam_plan = {}, int cim_states = 2)
        : geom_(g), cam_plan_(std::move(cam_plan)), cim_states_(cim_states) {
        geom_.validate();
        if (static_cast<int>(cam_plan_.size()) != geom_.cam_layers)
            throw UnsupportedConfigError("Plane: cam plan has " +
                                         std::to_string(cam_plan_.size()) + " layers, geometry " +
                                         std::to_string(geom_.cam_layers));
        if (cim_states_ < 2)
            throw UnsupportedConfigError("Plane: compute cells need >= 2 states");
        // inhibited by default: highest state never conducts under a read pulse
        levels_.assign(static_cast<std::size_t>(geom_.cells()),
                       static_cast<std::uint8_t>(cim_states_ - 1));
        // match cells default to value 0
        for (int b = 0; b < geom_.num_blocks; ++b)
            for (int s = 0; s < geom_.ssls_per_gsl; ++s)
                for (int l = 0; l < geom_.cam_layers; ++l)
                    std::memset(&levels_[index(b, s, l, 0)], 0,
                                static_cast<std::size_t>(geom_.page_size));
    }

    const PlaneGeometry& geometry() const { return geom_; }
    const std::vector<int>& cam_plan() const { return cam_plan_; }
    int cim_states() const { return cim_states_; }

    std::size_t index(int block, int ssl, int layer, int bitline) const {
        return ((static_cast<std::size_t>(block) * geom_.ssls_per_gsl + ssl) * geom_.layers_total +
                layer) *
                   geom_.page_size +
               bitline;
    }

    int level_at(int block, int ssl, int layer, int bitline) const {
        check_coords(block, ssl, layer, bitline);
        return levels_[index(block, ssl, layer, bitline)];
    }

    void set_level(int block, int ssl, int layer, int bitline, int level) {
        check_coords(block, ssl, layer, bitline);
        const int states = layer < geom_.cam_layers
                               ? (1 << cam_plan_[static_cast<std::size_t>(layer)])
                               : cim_states_;
        if (level < 0 || level >= states)
            throw ContractError("Plane: level " + std::to_string(level) + " invalid for layer " +
                                std::to_string(layer));
        levels_[index(block, ssl, layer, bitline)] = static_cast<std::uint8_t>(level);
    }

    /// Program a full match entry into every string of a block.
    void program_cam_entry(int block, const CamEntry& entry) {
        if (static_cast<int>(entry.layers.size()) != geom_.cam_layers)
            throw ContractError("program_cam_entry: entry shape does not match plane cam plan");
        for (std::size_t l = 0; l < entry.layers.size(); ++l) {
            if (entry.layers[l].bit_width != cam_plan_[l])
                throw ContractError("program_cam_entry: width mismatch at layer " +
                                    std::to_string(l));
            for (int s = 0; s < geom_.ssls_per_gsl; ++s)
                for (int bl = 0; bl < geom_.page_size; ++bl)
                    set_level(block, s, static_cast<int>(l), bl, entry.layers[l].value);
        }
    }

    /// Snapshot one string (small copy; the execution engine reads levels
    /// directly).
    StringImage string_at(int block, int ssl, int bitline) const {
        check_coords(block, ssl, 0, bitline);
        StringImage img;
        img.coords = {block, ssl, bitline};
        img.cam_cells.reserve(static_cast<std::size_t>(geom_.cam_layers));
        for (int l = 0; l < geom_.cam_layers; ++l)
            img.cam_cells.emplace_back(level_at(block, ssl, l, bitline),
                                       1 << cam_plan_[static_cast<std::size_t>(l)]);
        img.cim_cells.reserve(static_cast<std::size_t>(geom_.cim_layers()));
        for (int l = geom_.cam_layers; l < geom_.layers_total; ++l)
            img.cim_cells.emplace_back(level_at(block, ssl, l, bitline), cim_states_);
        return img;
    }

    /// Stored match entry of one string.
    CamEntry cam_entry_at(int block, int ssl, int bitline) const {
        CamEntry e;
        for (int l = 0; l < geom_.cam_layers; ++l)
            e.layers.push_back({cam_plan_[static_cast<std::size_t>(l)],
                                level_at(block, ssl, l, bitline)});
        return e;
    }

    // --- image serialization -------------------------------------------
    // Little-endian header (magic, version, geometry, cam plan, states)
    // followed by one byte per cell in (block, ssl, layer, bitline) order.

    static constexpr char kMagic[4] = {'N', 'C', 'P', 'L'};
    static constexpr std::uint32_t kVersion = 1;

    void save(const std::string& path) const {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        if (!f)
            throw std::runtime_error("Plane::save: cannot open " + path);
        auto w32 = [f](std::uint32_t v) {
            unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 24)};
            std::fwrite(b, 1, 4, f);
        };
        std::fwrite(kMagic, 1, 4, f);
        w32(kVersion);
        w32(static_cast<std::uint32_t>(geom_.layers_total));
        w32(static_cast<std::uint32_t>(geom_.cam_layers));
        w32(static_cast<std::uint32_t>(geom_.num_blocks));
        w32(static_cast<std::uint32_t>(geom_.ssls_per_gsl));
        w32(static_cast<std::uint32_t>(geom_.page_size));
        w32(static_cast<std::uint32_t>(cim_states_));
        w32(static_cast<std::uint32_t>(cam_plan_.size()));
        for (int wdt : cam_plan_)
            w32(static_cast<std::uint32_t>(wdt));
        std::fwrite(levels_.data(), 1, levels_.size(), f);
        std::fclose(f);
    }

    static Plane load(const std::string& path) {
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (!f)
            throw std::runtime_error("Plane::load: cannot open " + path);
        auto r32 = [f, &path]() {
            unsigned char b[4];
            if (std::fread(b, 1, 4, f) != 4) {
                std::fclose(f);
                throw CorruptCodeError("Plane::load: truncated header in " + path);
            }
            return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                   (static_cast<std::uint32_t>(b[2]) << 16) |
                   (static_cast<std::uint32_t>(b[3]) << 24);
        };
        char magic[4];
        if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kMagic, 4) != 0) {
            std::fclose(f);
            throw CorruptCodeError("Plane::load: bad magic in " + path);
        }
        if (r32() != kVersion) {
            std::fclose(f);
            throw CorruptCodeError("Plane::load: unsupported image version in " + path);
        }
        PlaneGeometry g;
        g.layers_total = static_cast<int>(r32());
        g.cam_layers = static_cast<int>(r32());
        g.num_blocks = static_cast<int>(r32());
        g.ssls_per_gsl = static_cast<int>(r32());
        g.page_size = static_cast<int>(r32());
        const int states = static_cast<int>(r32());
        const int plan_len = static_cast<int>(r32());
        std::vector<int> plan;
        for (int i = 0; i < plan_len; ++i)
            plan.push_back(static_cast<int>(r32()));
        Plane p(g, plan, states);
        const std::size_t n = p.levels_.size();
        if (std::fread(p.levels_.data(), 1, n, f) != n) {
            std::fclose(f);
            throw CorruptCodeError("Plane::load: truncated cell payload in " + path);
        }
        std::fclose(f);
        for (int b = 0; b < g.num_blocks; ++b)
            for (int s = 0; s < g.ssls_per_gsl; ++s)
                for (int l = 0; l < g.layers_total; ++l) {
                    const int limit = l < g.cam_layers
                                          ? (1 << plan[static_cast<std::size_t>(l)])
                                          : states;
                    const std::size_t base = p.index(b, s, l, 0);
                    for (int bl = 0; bl < g.page_size; ++bl)
                        if (p.levels_[base + static_cast<std::size_t>(bl)] >= limit)
                            throw CorruptCodeError(
                                "Plane::load: cell state out of range at (block " +
                                std::to_string(b) + ", ssl " + std::to_string(s) + ", layer " +
                                std::to_string(l) + ", bitline " + std::to_string(bl) + ")");
                }
        return p;
    }

    const std::vector<std::uint8_t>& raw_levels() const { return levels_; }

private:
    void check_coords(int block, int ssl, int layer, int bitline) const {
        if (block < 0 || block >= geom_.num_blocks || ssl < 0 || ssl >= geom_.ssls_per_gsl ||
            layer < 0 || layer >= geom_.layers_total || bitline < 0 || bitline >= geom_.page_size)
            throw ContractError("Plane: coordinates (" + std::to_string(block) + ", " +
                                std::to_string(ssl) + ", " + std::to_string(layer) + ", " +
                                std::to_string(bitline) + ") outside geometry");
    }

    PlaneGeometry geom_;
    std::vector<int> cam_plan_;
    int cim_states_ = 2;
    std::vector<std::uint8_t> levels_;
};

} // namespace nandcim
