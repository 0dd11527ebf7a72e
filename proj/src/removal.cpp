#include "prkit/removal.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <sstream>

#include "prkit/compose.hpp"
#include "prkit/png_io.hpp"

extern char** environ;

namespace prkit {

// ---------------------------------------------------------------------------
// Subprocess adapter

namespace {

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    std::string pattern =
        (base / ("prkit-restore-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++) + "-XXXXXX"))
            .string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      throw RestorerError("cannot create temporary directory: " + std::string(std::strerror(errno)));
    }
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::vector<std::string> split_words(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> words;
  for (std::string word; in >> word;) words.push_back(word);
  return words;
}

}  // namespace

SubprocessRestorer::SubprocessRestorer(std::string command) : command_(std::move(command)) {
  if (split_words(command_).empty()) throw ArgumentError("subprocess restorer: empty command");
}

Image SubprocessRestorer::restore(const Image& image, const Mask& mask) const {
  require_same_size(image, mask, "subprocess restorer");
  TempDir dir;
  const auto source_path = dir.path() / "source.png";
  const auto mask_path = dir.path() / "mask.png";
  const auto out_path = dir.path() / "out.png";
  write_image(source_path, image);
  write_mask(mask_path, mask);

  std::vector<std::string> args = split_words(command_);
  args.push_back(source_path.string());
  args.push_back(mask_path.string());
  args.push_back(out_path.string());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  if (const int rc = ::posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ); rc != 0) {
    throw RestorerError("cannot spawn restorer '" + args[0] + "': " + std::strerror(rc));
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw RestorerError("waitpid failed for restorer '" + args[0] + "'");
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw RestorerError("restorer '" + args[0] + "' failed with status " +
                        std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  if (!std::filesystem::exists(out_path)) {
    throw RestorerError("restorer '" + args[0] + "' produced no output image");
  }
  Image restored = read_image(out_path);
  if (!restored.same_size(image)) {
    throw RestorerError("restorer '" + args[0] + "' changed the image resolution");
  }
  return restored;
}

Image RecordingRestorer::restore(const Image& image, const Mask& mask) const {
  {
    std::lock_guard lock(mutex_);
    calls_.push_back({image, mask});
  }
  return inner_.restore(image, mask);
}

std::vector<RecordingRestorer::Call> RecordingRestorer::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

Image checked_restore(const Restorer& g, const Image& input, const Mask& mask) {
  Image out = g.restore(input, mask);
  if (!out.same_size(input)) {
    throw RestorerError("restorer '" + g.name() + "' returned a different resolution");
  }
  return out;
}

}  // namespace

Image remove_legacy(const Image& source, const Mask& mask, const Restorer& g) {
  require_same_size(source, mask, "remove_legacy");
  const Image holed = subtract_person(source, mask);
  return compose_masked(source, checked_restore(g, holed, mask), mask);
}

Image remove_mask_guided(const Image& source, const Mask& mask, const Restorer& g) {
  require_same_size(source, mask, "remove_mask_guided");
  return compose_masked(source, checked_restore(g, source, mask), mask);
}

CoarseToFine remove_coarse_to_fine(const Image& source, const Mask& mask, const Restorer& g,
                                   int iters) {
  if (iters < 1) throw ArgumentError("remove_coarse_to_fine: iters must be >= 1");
  CoarseToFine out;
  out.iterates.push_back(remove_mask_guided(source, mask, g));
  for (int k = 1; k < iters; ++k) {
    const Image& previous = out.iterates.back();
    out.iterates.push_back(compose_masked(source, checked_restore(g, previous, mask), mask));
  }
  out.result = out.iterates.back();
  return out;
}

std::string to_string(RemovalMode mode) {
  return mode == RemovalMode::legacy_inpaint ? "legacy_inpaint" : "mask_guided";
}

RemovalMode parse_removal_mode(const std::string& text) {
  if (text == "legacy_inpaint" || text == "legacy") return RemovalMode::legacy_inpaint;
  if (text == "mask_guided") return RemovalMode::mask_guided;
  throw ArgumentError("unknown removal mode '" + text + "' (expected legacy_inpaint or mask_guided)");
}

void validate(const RemovalConfig& config) {
  if (config.refine_iters < 1) throw ArgumentError("refine_iters must be >= 1");
  if (config.mask_dilation < 0) throw ArgumentError("mask_dilation must be >= 0");
}

std::unique_ptr<Restorer> make_restorer(const RemovalConfig& config) {
  if (config.restorer == "diffusion") return std::make_unique<DiffusionRestorer>(config.diffusion);
  if (config.restorer == "exemplar") return std::make_unique<ExemplarRestorer>(config.exemplar);
  if (config.restorer == "identity") return std::make_unique<IdentityRestorer>();
  if (config.restorer == "subprocess") {
    return std::make_unique<SubprocessRestorer>(config.restorer_command);
  }
  throw ArgumentError("unknown restorer '" + config.restorer +
                      "' (expected diffusion, exemplar, identity or subprocess)");
}

RemovalOutput remove_person(const Image& source, const Mask& mask, const Restorer& g,
                            const RemovalConfig& config) {
  validate(config);
  require_same_size(source, mask, "remove_person");
  RemovalOutput out;
  if (count_set(mask) == 0) {
    out.prediction = source;
    out.working_mask = mask;
    out.iterates.push_back(source);
    return out;
  }
  out.working_mask = dilate(mask, config.mask_dilation);
  if (config.mode == RemovalMode::legacy_inpaint) {
    out.prediction = remove_legacy(source, out.working_mask, g);
    out.iterates.push_back(out.prediction);
    return out;
  }
  auto refined = remove_coarse_to_fine(source, out.working_mask, g, config.refine_iters);
  out.prediction = std::move(refined.result);
  out.iterates = std::move(refined.iterates);
  return out;
}

}  // namespace prkit
