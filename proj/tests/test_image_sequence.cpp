#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "cfkit/image.hpp"
#include "cfkit/rng.hpp"
#include "cfkit/sequence.hpp"
#include "cfkit/synth.hpp"

using namespace cfkit;
namespace fs = std::filesystem;

namespace {

Image noise_image(int w, int h, Rng& rng) {
    Image img(w, h);
    for (double& p : img.pixels) p = rng.uniform01();
    return img;
}

struct TempDir {
    fs::path path;
    TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("extract_patch is an identity crop when aligned and unscaled") {
    Rng rng(1);
    const Image img = noise_image(16, 16, rng);
    // window [4,10) x [4,10): left = cx - 3 = 4
    const Plane p = extract_patch(img, 7.0, 7.0, 6.0, 6);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) REQUIRE(p.data(r, c) == img.at(4 + r, 4 + c));
}

TEST_CASE("extract_patch replicates edges outside the frame") {
    Rng rng(2);
    const Image img = noise_image(8, 8, rng);
    const Plane p = extract_patch(img, 0.0, 0.0, 8.0, 8);
    // top-left quadrant of the window lies outside; corner samples clamp to (0,0)
    REQUIRE(p.data(0, 0) == img.at(0, 0));
    REQUIRE(p.data(0, 3) == img.at(0, 0));
    REQUIRE(p.data(3, 0) == img.at(0, 0));
    // interior of the window hits real pixels
    REQUIRE(p.data(7, 7) == img.at(3, 3));
}

TEST_CASE("extract_patch downscale by two equals the 2x2 block average") {
    Rng rng(3);
    const Image img = noise_image(12, 12, rng);
    const Plane p = extract_patch(img, 6.0, 6.0, 12.0, 6);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
            const double avg = 0.25 * (img.at(2 * r, 2 * c) + img.at(2 * r, 2 * c + 1) +
                                       img.at(2 * r + 1, 2 * c) + img.at(2 * r + 1, 2 * c + 1));
            REQUIRE(p.data(r, c) == Catch::Approx(avg).margin(1e-12));
        }
    REQUIRE_THROWS_AS(extract_patch(img, 0, 0, -1.0, 4), DegenerateRect);
}

TEST_CASE("PGM round trip is exact at 8-bit resolution") {
    TempDir dir("cfkit_pgm_test");
    Image img(5, 3);
    for (size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = (i % 256) / 255.0;
    const std::string path = (dir.path / "x.pgm").string();
    write_pgm(img, path);
    const Image back = read_pgm(path);
    REQUIRE(back.width == 5);
    REQUIRE(back.height == 3);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        REQUIRE(back.pixels[i] == Catch::Approx(img.pixels[i]).margin(0.5 / 255.0));
}

TEST_CASE("read_frame rejects unknown extensions") {
    REQUIRE_THROWS_AS(read_frame("/nonexistent/frame.tiff"), UnsupportedFormat);
}

TEST_CASE("sequence round trip through the manifest layout") {
    TempDir dir("cfkit_seq_test");
    SynthOptions opt;
    opt.frames = 3;
    opt.seed = 5;
    const SequenceData seq = make_synthetic_sequence(opt);
    write_sequence(seq, dir.path.string());

    const SequenceAnnotation ann = load_sequence(dir.path.string());
    REQUIRE(ann.length() == 3);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(ann.ground_truth[i].x == Catch::Approx(seq.ground_truth[i].x));
        REQUIRE(ann.ground_truth[i].y == Catch::Approx(seq.ground_truth[i].y));
        REQUIRE(ann.ground_truth[i].w == Catch::Approx(seq.ground_truth[i].w));
    }
    const SequenceData loaded = materialize(ann);
    REQUIRE(loaded.frames[0].width == seq.frames[0].width);
}

TEST_CASE("ground-truth lines parse 1-based comma or tab separated rects") {
    TempDir dir("cfkit_parse_test");
    fs::create_directories(dir.path / "img");
    Image img(4, 4);
    write_pgm(img, (dir.path / "img" / "0001.pgm").string());
    {
        std::ofstream gt(dir.path / "groundtruth_rect.txt");
        gt << "10,20,30,40\n";
    }
    // single frame: below the 2-frame minimum
    REQUIRE_THROWS_AS(load_sequence(dir.path.string()), EmptyInput);

    write_pgm(img, (dir.path / "img" / "0002.pgm").string());
    {
        std::ofstream gt(dir.path / "groundtruth_rect.txt");
        gt << "10,20,30,40\n11\t21\t31\t41\n";
    }
    const SequenceAnnotation ann = load_sequence(dir.path.string());
    REQUIRE(ann.ground_truth[0].x == 9.0);  // stored 1-based
    REQUIRE(ann.ground_truth[0].y == 19.0);
    REQUIRE(ann.ground_truth[0].w == 30.0);
    REQUIRE(ann.ground_truth[0].h == 40.0);
    REQUIRE(ann.ground_truth[1].x == 10.0);
}

TEST_CASE("manifest errors: missing ground truth and frame count mismatch") {
    TempDir dir("cfkit_manifest_err");
    fs::create_directories(dir.path / "img");
    REQUIRE_THROWS_AS(load_sequence(dir.path.string()), MissingGroundTruth);

    Image img(4, 4);
    for (int i = 1; i <= 4; ++i)
        write_pgm(img, (dir.path / "img" / ("000" + std::to_string(i) + ".pgm")).string());
    {
        std::ofstream gt(dir.path / "groundtruth_rect.txt");
        gt << "1,1,2,2\n1,1,2,2\n1,1,2,2\n";  // 3 rects for 4 frames
    }
    REQUIRE_THROWS_AS(load_sequence(dir.path.string()), FrameCountMismatch);
}
