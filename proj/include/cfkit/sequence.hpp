#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cfkit/image.hpp"

// Sequence manifests: a directory with groundtruth_rect.txt (one 1-based
// "x,y,w,h" line per frame) and an img/ subdirectory of frames, sorted
// lexicographically.

namespace cfkit {

struct SequenceAnnotation {
    std::vector<std::string> frame_paths;
    std::vector<Rect> ground_truth;  // 0-based pixel coordinates

    int length() const { return static_cast<int>(frame_paths.size()); }
};

/// Fully materialized sequence: decoded frames plus ground truth.
struct SequenceData {
    std::vector<Image> frames;
    std::vector<Rect> ground_truth;

    int length() const { return static_cast<int>(frames.size()); }
};

inline Rect parse_rect_line(const std::string& line) {
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::replace(cleaned.begin(), cleaned.end(), '\t', ' ');
    std::istringstream ss(cleaned);
    Rect r;
    if (!(ss >> r.x >> r.y >> r.w >> r.h))
        throw UnsupportedFormat("bad ground-truth line: '" + line + "'");
    return r;
}

inline SequenceAnnotation load_sequence(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    const fs::path gt_path = root / "groundtruth_rect.txt";
    if (!fs::exists(gt_path))
        throw MissingGroundTruth("no groundtruth_rect.txt in " + dir);

    SequenceAnnotation seq;
    {
        std::ifstream in(gt_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            Rect r = parse_rect_line(line);
            r.x -= 1.0;  // stored 1-based
            r.y -= 1.0;
            seq.ground_truth.push_back(r);
        }
    }

    const fs::path img_dir = root / "img";
    if (!fs::is_directory(img_dir))
        throw UnsupportedFormat("no img/ subdirectory in " + dir);
    for (const auto& entry : fs::directory_iterator(img_dir)) {
        if (!entry.is_regular_file()) continue;
        seq.frame_paths.push_back(entry.path().string());
    }
    std::sort(seq.frame_paths.begin(), seq.frame_paths.end());

    if (seq.frame_paths.size() != seq.ground_truth.size())
        throw FrameCountMismatch("frames=" + std::to_string(seq.frame_paths.size()) +
                                 " rects=" + std::to_string(seq.ground_truth.size()) + " in " +
                                 dir);
    if (seq.length() < 2) throw EmptyInput("sequence needs at least 2 frames: " + dir);
    return seq;
}

inline SequenceData materialize(const SequenceAnnotation& ann) {
    SequenceData data;
    data.ground_truth = ann.ground_truth;
    data.frames.reserve(ann.frame_paths.size());
    for (const std::string& p : ann.frame_paths) data.frames.push_back(read_frame(p));
    return data;
}

/// Write a sequence in the manifest layout (PGM frames, 1-based ground truth).
inline void write_sequence(const SequenceData& seq, const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root / "img");

    char name[32];
    for (int i = 0; i < seq.length(); ++i) {
        std::snprintf(name, sizeof(name), "%04d.pgm", i + 1);
        write_pgm(seq.frames[static_cast<size_t>(i)], (root / "img" / name).string());
    }

    const fs::path gt_tmp = root / "groundtruth_rect.txt.tmp";
    {
        std::ofstream out(gt_tmp, std::ios::trunc);
        out.precision(17);
        for (const Rect& r : seq.ground_truth)
            out << r.x + 1.0 << "," << r.y + 1.0 << "," << r.w << "," << r.h << "\n";
    }
    fs::rename(gt_tmp, root / "groundtruth_rect.txt");
}

}  // namespace cfkit
