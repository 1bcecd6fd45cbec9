#pragma once

#include "blindgate/pbrsa.hpp"

#include <span>
#include <utility>
#include <vector>

namespace blindgate::pbrsa {

/// Batch kernels run either on the serial reference path or the OpenMP path.
/// The two paths produce identical results element for element; tests compare
/// them and the issuance benchmark races them.
enum class Exec { serial, parallel };

/// Blinds one ticket per element under a single metadata value. Each element
/// draws randomness from its own factory-provided source, so results do not
/// depend on scheduling order. Returns index-aligned messages and states.
std::pair<std::vector<BlindedMessage>, std::vector<BlindingState>> blind_batch(
    std::span<const Ticket> tickets, const InfoBytes& info, const PublicKey& pk,
    const RandomFactory& rng_factory, Exec exec);

/// Signs every blinded message under one metadata value. The secret exponent
/// is derived once for the whole batch.
std::vector<BlindSignature> sign_blinded_batch(std::span<const BlindedMessage> blinded,
                                               const InfoBytes& info, const KeyPair& kp,
                                               Exec exec);

std::vector<Signature> unblind_batch(std::span<const BlindSignature> blind_sigs,
                                     std::span<const BlindingState> states,
                                     const PublicKey& pk, Exec exec);

/// Element-wise verification results (1 = valid).
std::vector<std::uint8_t> verify_batch(std::span<const Signature> sigs,
                                       std::span<const Ticket> tickets, const InfoBytes& info,
                                       const PublicKey& pk, Exec exec);

} // namespace blindgate::pbrsa
