#include "lstlab/beacon.hpp"

#include "lstlab/errors.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <memory>

namespace lstlab::beacon {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

EVP_MD_CTX* thread_ctx() {
  thread_local std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  return ctx.get();
}

// Explicitly fetched once: implicit fetches on every init dominate the cost of short inputs.
const EVP_MD* sha256_md() {
  static EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
  return md;
}

void put_u64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

}  // namespace

const char* group_label(Group g) {
  switch (g) {
    case Group::kAdversary: return "A";
    case Group::kTarget: return "T";
    case Group::kHonest: return "H";
  }
  return "?";
}

Group parse_group(std::string_view label) {
  if (label == "A") return Group::kAdversary;
  if (label == "T") return Group::kTarget;
  if (label == "H") return Group::kHonest;
  throw DataError("unknown group label '" + std::string(label) + "'");
}

double StakeConfig::share(Group g) const {
  switch (g) {
    case Group::kAdversary: return adversary;
    case Group::kTarget: return target;
    case Group::kHonest: return honest();
  }
  return 0.0;
}

void StakeConfig::validate() const {
  if (!(adversary > 0.0 && adversary <= 1.0)) {
    throw UsageError("alpha_adversary must lie in (0,1]");
  }
  if (!(target >= 0.0 && target < 1.0)) {
    throw UsageError("alpha_target must lie in [0,1)");
  }
  if (adversary + target > 1.0 + 1e-12) {
    throw UsageError("alpha_adversary + alpha_target must not exceed 1");
  }
}

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out{};
  EVP_MD_CTX* ctx = thread_ctx();
  unsigned int len = 0;
  if (sha256_md() == nullptr || EVP_DigestInit_ex2(ctx, sha256_md(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &len) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  return out;
}

std::string RandaoMix::hex() const {
  std::string s;
  s.reserve(64);
  char buf[3];
  for (auto b : bits) {
    std::snprintf(buf, sizeof buf, "%02x", b);
    s += buf;
  }
  return s;
}

Digest contribution(const Reveal& reveal) { return sha256(reveal.value); }

void absorb(RandaoMix& mix, const Digest& c) {
  for (std::size_t i = 0; i < mix.bits.size(); ++i) mix.bits[i] ^= c[i];
}

RandaoMix mix_update(const RandaoMix& mix, const Reveal& reveal) {
  RandaoMix out = mix;
  absorb(out, contribution(reveal));
  return out;
}

Reveal derive_reveal(std::uint64_t seed, Group group, std::uint64_t epoch, int slot) {
  std::array<std::uint8_t, 4 + 8 + 1 + 8 + 4> buf{};
  buf[0] = 'r';
  buf[1] = 'v';
  buf[2] = 'l';
  buf[3] = ':';
  put_u64(buf.data() + 4, seed);
  buf[12] = static_cast<std::uint8_t>(group);
  put_u64(buf.data() + 13, epoch);
  const auto s = static_cast<std::uint32_t>(slot);
  buf[21] = static_cast<std::uint8_t>(s >> 24);
  buf[22] = static_cast<std::uint8_t>(s >> 16);
  buf[23] = static_cast<std::uint8_t>(s >> 8);
  buf[24] = static_cast<std::uint8_t>(s);
  return Reveal{sha256(buf)};
}

RandaoMix genesis_mix(std::uint64_t seed) {
  std::array<std::uint8_t, 8 + 8> buf{};
  const char tag[8] = {'g', 'e', 'n', 'e', 's', 'i', 's', ':'};
  for (int i = 0; i < 8; ++i) buf[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(tag[i]);
  put_u64(buf.data() + 8, seed);
  return RandaoMix{sha256(buf)};
}

int ProposerSchedule::count(Group g) const {
  int n = 0;
  for (auto s : slots) n += (s == g);
  return n;
}

int ProposerSchedule::tail_run(Group g) const {
  int n = 0;
  for (int i = kSlotsPerEpoch - 1; i >= 0 && slots[static_cast<std::size_t>(i)] == g; --i) ++n;
  return n;
}

double slot_uniform(const RandaoMix& mix, std::uint64_t epoch, int slot) {
  std::array<std::uint8_t, 32 + 8 + 4> buf{};
  std::copy(mix.bits.begin(), mix.bits.end(), buf.begin());
  put_u64(buf.data() + 32, epoch);
  const auto s = static_cast<std::uint32_t>(slot);
  buf[40] = static_cast<std::uint8_t>(s >> 24);
  buf[41] = static_cast<std::uint8_t>(s >> 16);
  buf[42] = static_cast<std::uint8_t>(s >> 8);
  buf[43] = static_cast<std::uint8_t>(s);
  const Digest d = sha256(buf);
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x = (x << 8) | d[static_cast<std::size_t>(i)];
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

Group select_group(double u, const StakeConfig& stakes) {
  if (u < stakes.adversary) return Group::kAdversary;
  if (u < stakes.adversary + stakes.target) return Group::kTarget;
  return Group::kHonest;
}

ProposerSchedule draw_schedule(const RandaoMix& mix, const StakeConfig& stakes, std::uint64_t epoch) {
  ProposerSchedule out;
  out.epoch = epoch;
  for (int s = 0; s < kSlotsPerEpoch; ++s) {
    out.slots[static_cast<std::size_t>(s)] = select_group(slot_uniform(mix, epoch, s), stakes);
  }
  return out;
}

std::array<int, kGroupCount> schedule_counts(const RandaoMix& mix, const StakeConfig& stakes,
                                             std::uint64_t epoch) {
  std::array<int, kGroupCount> counts{};
  for (int s = 0; s < kSlotsPerEpoch; ++s) {
    ++counts[static_cast<std::size_t>(select_group(slot_uniform(mix, epoch, s), stakes))];
  }
  return counts;
}

}  // namespace lstlab::beacon
