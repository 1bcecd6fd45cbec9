#pragma once

#include <stdexcept>
#include <string>

namespace blindgate {

// Stable error codes. These strings appear verbatim in HTTP error bodies
// and in CLI output, so renaming one is a wire-format change.
enum class Errc {
    not_invertible,
    degenerate_modulus,
    malformed_blinded,
    invalid_blind_signature,
    malformed_plan,
    malformed_info,
    auth_failed,
    conflict,
    insufficient_credits,
    wrong_deadline,
    token_limit,
    invalid_signature,
    double_spend,
    expired_info,
    backend_error,
    storage_failure,
    network,
    pin_mismatch,
    no_credential,
    invalid_next_signature,
    corrupt_wallet,
    wallet_locked,
    bad_config,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace blindgate
