#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sten/codes.hpp"
#include "sten/protocol.hpp"

namespace sten {

// A server reduced to what the security argument sees: a stored string y and
// a deterministic answer map A(beta, y). The same (beta, y) must always give
// the same answer across an audit series; that determinism is what makes the
// answer table enumerable.
struct Responder {
    std::vector<std::uint8_t> stored;
    std::function<std::uint64_t(std::uint32_t beta,
                                const std::vector<std::uint8_t>& y)>
        answer;

    std::uint64_t stored_bits() const { return 8 * stored.size(); }
};

struct ExtractionResult {
    // Candidate messages in canonical order (message = base-q digits for
    // code-based extraction, a single integer for the residue family).
    std::vector<std::vector<std::uint64_t>> candidates;
    std::optional<std::size_t> advice_index; // position of the true x, if given
    std::uint64_t list_bound = 0;            // L
    std::uint32_t radius = 0;                // floor(rho * n)
};

// The executable form of the security argument: tabulate the responder's
// full answer vector z = (A(beta, y)) over all n challenges, then enumerate
// every message u and keep those with Hamming distance at most floor(rho*n)
// from z. A responder that passes on at least a (1-rho) fraction of
// challenges necessarily puts the true message in this list, and the list
// never exceeds the Johnson bound L. Desk scale only: the message space is
// guarded to at most 2^24.
ExtractionResult extract_list(const Responder& responder,
                              const CodeParams& code, double rho,
                              std::optional<std::vector<std::uint64_t>> true_x =
                                  std::nullopt);

// Same procedure over a generator-matrix code (parameter regimes RS cannot
// reach). list_bound is supplied by the caller (johnson_radius of the code's
// measured distance).
ExtractionResult extract_list_linear(const Responder& responder,
                                     const LinearCode& code, double rho,
                                     std::uint64_t list_bound,
                                     std::optional<std::vector<std::uint64_t>>
                                         true_x = std::nullopt);

// Coalition extraction for the sum-checked scheme: z is the per-challenge
// sum of the coalition's answers only. Because the code is linear and the
// honest servers contribute their exact embedded hashes, a coalition that
// passes on a (1-rho) fraction of challenges lands the zero-padded joint
// shard x_hat_T within radius of z. honest_shards documents (and validates)
// the complement; it does not enter z.
ExtractionResult extract_coalition(
    const std::map<std::uint16_t, Responder>& coalition,
    const std::map<std::uint16_t, std::vector<std::uint64_t>>& honest_shards,
    const CodeParams& code, std::uint16_t s, double rho,
    std::optional<std::vector<std::uint64_t>> true_xhat = std::nullopt);

// Keep only candidates whose code position beta equals gamma. Narrows a
// list with one stored hash; no success probability is claimed for it.
std::vector<std::vector<std::uint64_t>> filter_candidates(
    const std::vector<std::vector<std::uint64_t>>& candidates,
    const CodeParams& code, std::uint32_t beta, std::uint64_t gamma);

// Itemized storage lower bound. All logs are base 2 and every term is
// reported separately so the arithmetic can be audited. To keep the numbers
// reproducible bit-for-bit, slack_main is defined as the left-to-right IEEE
// double sum of component logs:
//   Single:            lg q + lg L + 3*lg n
//   Trivial:           2*lg s + lg q + s*lg L + 4*lg n
//   Linear / RsParity: 2*lg s + lg q + lg L + 4*lg n
// and f = c_estimate - s_term - slack_main - slack_loglog - c0, evaluated in
// that order, with slack_loglog = 2*lg(lg(q*n)) and s_term = s (0 for
// Single).
struct StorageBound {
    Scheme scheme = Scheme::Single;
    double c_estimate = 0; // bits
    double s_term = 0;
    double slack_main = 0;
    double slack_loglog = 0;
    double c0 = 0;
    double f_value = 0;
};

StorageBound storage_bound(Scheme scheme, const CodeParams& code,
                           std::uint16_t s, double c_estimate_bits, double c0);

// Upper estimate of description length in bits: 8 x deflate(level 9) output
// length plus a fixed decoder-stub allowance. This is an upper bound on an
// uncomputable quantity and is labeled an estimate everywhere it surfaces.
constexpr std::uint64_t kDecoderStubBits = 2048;
std::uint64_t kolmogorov_upper_estimate(std::span<const std::uint8_t> data);

} // namespace sten
