#include "occur/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace occur {

namespace fs = std::filesystem;

namespace {

bool glyph_covers(Glyph glyph, long dy, long dx, long s) {
  const long t = std::max(1L, s / 4);
  const long ady = std::abs(dy), adx = std::abs(dx);
  switch (glyph) {
    case Glyph::disc: return dy * dy + dx * dx <= s * s;
    case Glyph::square: {
      long half = (4 * s + 2) / 5;
      return ady <= half && adx <= half;
    }
    case Glyph::triangle: return dy >= -s && dy <= s && 2 * adx <= dy + s;
    case Glyph::cross: return (ady <= t && adx <= s) || (adx <= t && ady <= s);
    case Glyph::ring: {
      long r2 = dy * dy + dx * dx;
      return r2 <= s * s && r2 >= (s - t) * (s - t);
    }
    case Glyph::diamond: return ady + adx <= s;
    case Glyph::hbar: return ady <= t && adx <= s;
    case Glyph::vbar: return adx <= t && ady <= s;
    case Glyph::saltire: return std::abs(ady - adx) <= std::max(1L, t / 2) && ady <= s && adx <= s;
    case Glyph::frame: return ady <= s && adx <= s && (ady > s - t || adx > s - t);
  }
  return false;
}

void skip_pgm_space(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

long read_pgm_int(std::istream& in, const fs::path& path) {
  skip_pgm_space(in);
  long v = -1;
  in >> v;
  if (!in || v <= 0) throw std::runtime_error("corrupt PGM header in " + path.string());
  return v;
}

std::vector<Sample> rescale(const std::vector<Sample>& samples, double lo, double span) {
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) {
    std::vector<double> values(s.image.values().begin(), s.image.values().end());
    for (double& v : values) v = span > 0.0 ? (v - lo) / span : 0.0;
    Sample copy = s;
    copy.image = DenseArray(s.image.shape(), std::move(values));
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace

std::string_view to_string(Glyph glyph) {
  static constexpr std::array<std::string_view, kGlyphCount> names{
      "disc", "square", "triangle", "cross", "ring", "diamond", "hbar", "vbar", "saltire", "frame"};
  return names[static_cast<std::size_t>(glyph)];
}

void TaskSpec::validate() const {
  if (height < 8 || width < 8) throw std::invalid_argument("TaskSpec: images smaller than 8x8 cannot hold glyphs");
  if (channels != 1 && channels != 3) throw std::invalid_argument("TaskSpec: channels must be 1 or 3");
  if (classes < 2 || classes > kGlyphCount) throw std::invalid_argument("TaskSpec: classes must lie in [2, 10]");
  if (samples < classes) throw std::invalid_argument("TaskSpec: need at least one sample per class (n >= k)");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("TaskSpec: noise_sigma must be >= 0");
  if (!(position_jitter >= 0.0 && position_jitter <= 0.5)) {
    throw std::invalid_argument("TaskSpec: position_jitter must lie in [0, 0.5]");
  }
  if (!(background >= 0.0 && background <= 1.0 && foreground >= 0.0 && foreground <= 1.0)) {
    throw std::invalid_argument("TaskSpec: intensities must lie in [0, 1]");
  }
}

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::all: return "all";
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    case SplitTag::test: return "test";
  }
  return "?";
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(classes(), 0);
  for (const Sample& s : samples) ++counts.at(s.label);
  return counts;
}

LabeledDataset generate_synthetic(const TaskSpec& spec, Rng& rng) {
  spec.validate();
  LabeledDataset ds;
  for (std::size_t c = 0; c < spec.classes; ++c) ds.class_names.emplace_back(to_string(static_cast<Glyph>(c)));

  const long h = static_cast<long>(spec.height), w = static_cast<long>(spec.width);
  const long min_scale = std::max(3L, std::min(h, w) / 5);
  const long max_scale = std::max(min_scale, std::min(h, w) / 3);
  const auto shift = static_cast<long>(spec.position_jitter * static_cast<double>(std::min(h, w)));
  // centre offset drawn in [-shift, shift], then clamped so the glyph stays inside
  auto place = [&](long extent, long s) {
    long c = extent / 2 - shift + static_cast<long>(rng.uniform_index(static_cast<std::size_t>(2 * shift + 1)));
    return std::clamp(c, s, extent - 1 - s);
  };
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const std::size_t label = i % spec.classes;
    const Glyph glyph = static_cast<Glyph>(label);
    const long s = min_scale + static_cast<long>(rng.uniform_index(static_cast<std::size_t>(max_scale - min_scale + 1)));
    const long cy = place(h, s);
    const long cx = place(w, s);

    std::vector<double> pixels(spec.height * spec.width * spec.channels);
    for (long r = 0; r < h; ++r) {
      for (long c = 0; c < w; ++c) {
        double base = glyph_covers(glyph, r - cy, c - cx, s) ? spec.foreground : spec.background;
        for (std::size_t ch = 0; ch < spec.channels; ++ch) {
          double v = base;
          if (spec.noise_sigma > 0.0) v = std::clamp(v + spec.noise_sigma * rng.normal(), 0.0, 1.0);
          pixels[(static_cast<std::size_t>(r * w + c)) * spec.channels + ch] = v;
        }
      }
    }
    Shape shape = spec.channels == 1 ? Shape{spec.height, spec.width} : Shape{spec.height, spec.width, spec.channels};
    ds.samples.push_back(Sample{DenseArray(std::move(shape), std::move(pixels)), label, 0.0, i, 0});
  }
  return ds;
}

DenseArray read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw std::runtime_error("not a binary PGM (P5): " + path.string());
  const long width = read_pgm_int(in, path);
  const long height = read_pgm_int(in, path);
  const long maxval = read_pgm_int(in, path);
  if (maxval > 65535) throw std::runtime_error("corrupt PGM header in " + path.string());
  int sep = in.get();
  if (sep != ' ' && sep != '\n' && sep != '\r' && sep != '\t') throw std::runtime_error("corrupt PGM header in " + path.string());

  const std::size_t n = static_cast<std::size_t>(width * height);
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(n * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw std::runtime_error("truncated PGM data in " + path.string());

  std::vector<double> pixels(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned v = bytes_per == 1 ? raw[i] : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
    if (v > static_cast<unsigned>(maxval)) throw std::runtime_error("PGM sample exceeds maxval in " + path.string());
    pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return DenseArray({static_cast<std::size_t>(height), static_cast<std::size_t>(width)}, std::move(pixels));
}

void write_pgm(const fs::path& path, const DenseArray& image) {
  if (image.rank() != 2) throw std::invalid_argument("write_pgm: expected a [h, w] image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << image.shape()[1] << ' ' << image.shape()[0] << "\n255\n";
  std::vector<unsigned char> raw(image.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<unsigned char>(std::lround(std::clamp(image[i], 0.0, 1.0) * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

LabeledDataset load_directory(const fs::path& root, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw std::invalid_argument("load_directory: target size must be positive");
  if (!fs::is_directory(root)) throw std::runtime_error("dataset root is not a directory: " + root.string());
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw std::runtime_error("no class subdirectories under " + root.string());

  LabeledDataset ds;
  for (std::size_t label = 0; label < class_dirs.size(); ++label) {
    ds.class_names.push_back(class_dirs[label].filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dirs[label])) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("class directory has no .pgm images: " + class_dirs[label].string());
    for (const fs::path& file : files) {
      DenseArray src = read_pgm(file);
      const std::size_t sh = src.shape()[0], sw = src.shape()[1];
      std::vector<double> pixels(height * width);
      for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) pixels[r * width + c] = src.at(r * sh / height, c * sw / width);
      }
      std::size_t index = ds.samples.size();
      ds.samples.push_back(Sample{DenseArray({height, width}, std::move(pixels)), label, 0.0, index, 0});
    }
  }
  return ds;
}

DatasetSplit split(const LabeledDataset& ds, std::array<double, 3> fractions, Rng& rng) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw std::invalid_argument("split: fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split: fractions must sum to 1");

  DatasetSplit out;
  std::array<LabeledDataset*, 3> parts{&out.train, &out.val, &out.test};
  const std::array<SplitTag, 3> tags{SplitTag::train, SplitTag::val, SplitTag::test};
  for (std::size_t p = 0; p < 3; ++p) {
    parts[p]->class_names = ds.class_names;
    parts[p]->split = tags[p];
  }

  std::vector<std::vector<std::size_t>> by_class(ds.classes());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) by_class.at(ds.samples[i].label).push_back(i);

  std::array<std::vector<std::size_t>, 3> chosen;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    const double n = static_cast<double>(members.size());
    std::size_t n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
    std::size_t n_val = static_cast<std::size_t>(std::llround(fractions[1] * n));
    n_train = std::min(n_train, members.size());
    n_val = std::min(n_val, members.size() - n_train);
    std::size_t n_test = members.size() - n_train - n_val;
    const std::array<std::size_t, 3> counts{n_train, n_val, n_test};
    for (std::size_t p = 0; p < 3; ++p) {
      if (counts[p] == 0) {
        throw std::invalid_argument("split: " + std::string(to_string(tags[p])) + " split receives no samples of class '" +
                                    ds.class_names[c] + "'");
      }
    }
    std::size_t offset = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      chosen[p].insert(chosen[p].end(), members.begin() + static_cast<std::ptrdiff_t>(offset),
                       members.begin() + static_cast<std::ptrdiff_t>(offset + counts[p]));
      offset += counts[p];
    }
  }
  for (std::size_t p = 0; p < 3; ++p) {
    std::sort(chosen[p].begin(), chosen[p].end());
    for (std::size_t i : chosen[p]) parts[p]->samples.push_back(ds.samples[i]);
  }
  return out;
}

NormalizedDataset normalize(const LabeledDataset& ds) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Sample& s : ds.samples) {
    for (double v : s.image.values()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (ds.samples.empty()) throw std::invalid_argument("normalize: empty dataset");
  NormalizedDataset out;
  out.degenerate = !(hi > lo);
  // Data already inside [0, 1] is left as is.
  out.params = (!out.degenerate && lo >= 0.0 && hi <= 1.0) ? NormalizationParams{0.0, 1.0}
                                                          : NormalizationParams{lo, hi};
  out.data = apply_normalization(ds, out.params);
  return out;
}

LabeledDataset apply_normalization(const LabeledDataset& ds, const NormalizationParams& params) {
  LabeledDataset out;
  out.class_names = ds.class_names;
  out.split = ds.split;
  out.samples = rescale(ds.samples, params.min, params.max - params.min);
  return out;
}

}  // namespace occur
