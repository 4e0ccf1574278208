#pragma once

// Writes seeded synthetic datasets (images, ground truth, manifests) to disk.

#include "maskfuse/image_io.hpp"
#include "maskfuse/providers.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

namespace corpus {

namespace fs = std::filesystem;

/// Fresh, empty directory under the system temp dir.
inline fs::path scratch(std::string const& name) {
    auto dir = fs::temp_directory_path() / ("maskfuse_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline void write_text(fs::path const& path, std::string const& text) {
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(fs::path const& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline fs::path write_classes(fs::path const& dir, int class_count) {
    std::string text = "background\n";
    for (int c = 1; c < class_count; ++c) text += "class" + std::to_string(c) + "\n";
    auto path = dir / ("classes_" + std::to_string(class_count) + ".txt");
    write_text(path, text);
    return path;
}

/// `count` random scenes with 3..5 classes, one dataset per class list. Returns the manifest path.
inline fs::path write_ovss(fs::path const& dir, int count, std::uint64_t seed, int size = 64) {
    maskfuse::Rng rng(seed);
    std::ofstream manifest(dir / "ovss.jsonl");
    for (int i = 0; i < count; ++i) {
        int const classes = 3 + static_cast<int>(rng() % 3);
        auto spec = maskfuse::random_scene_spec(rng, size, size, classes, 2 + static_cast<int>(rng() % 4));
        auto const scene = maskfuse::make_scene(spec);
        auto const stem = "scene_" + std::to_string(i);
        maskfuse::write_rgb_png(dir / (stem + ".png"), scene.image);
        maskfuse::write_label_png(dir / (stem + "_gt.png"), scene.gt);
        auto const cls = write_classes(dir, classes);
        nlohmann::json rec = {{"image", stem + ".png"},
                              {"gt_mask", stem + "_gt.png"},
                              {"task", "ovss"},
                              {"classes", cls.filename().string()},
                              {"dataset", cls.stem().string()}};
        manifest << rec.dump() << '\n';
    }
    return dir / "ovss.jsonl";
}

/// Palette rendering of a binary mask (foreground = label 1).
inline maskfuse::RgbImage render_mask(maskfuse::BinaryMask const& m) {
    maskfuse::RgbImage img(m.width(), m.height());
    auto const fg = maskfuse::palette_color(1);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.get(x, y)) std::copy(fg.begin(), fg.end(), img.at(x, y));
    return img;
}

/// Writes one mask item (image + gt) and returns its manifest record.
inline nlohmann::json write_mask_item(fs::path const& dir, std::string const& stem, maskfuse::BinaryMask const& gt,
                                      std::string const& task = "refer") {
    maskfuse::write_rgb_png(dir / (stem + ".png"), render_mask(gt));
    maskfuse::write_mask_png(dir / (stem + "_gt.png"), gt);
    return {{"image", stem + ".png"}, {"gt_mask", stem + "_gt.png"}, {"task", task}, {"question", "the object"}};
}

/// Single rectangle or disk on a `size` x `size` canvas.
inline maskfuse::BinaryMask random_object(maskfuse::Rng& rng, int size) {
    auto spec = maskfuse::random_scene_spec(rng, size, size, 2, 1);
    return maskfuse::make_scene(spec).gt.mask_of(1);
}

inline fs::path write_manifest(fs::path const& path, std::vector<nlohmann::json> const& records) {
    std::ofstream out(path);
    for (auto const& r : records) out << r.dump() << '\n';
    return path;
}

} // namespace corpus
