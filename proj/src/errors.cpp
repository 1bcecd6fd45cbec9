#include "blindgate/errors.hpp"

namespace blindgate {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::not_invertible: return "NOT_INVERTIBLE";
    case Errc::degenerate_modulus: return "DEGENERATE_MODULUS";
    case Errc::malformed_blinded: return "MALFORMED_BLINDED";
    case Errc::invalid_blind_signature: return "INVALID_BLIND_SIGNATURE";
    case Errc::malformed_plan: return "MALFORMED_PLAN";
    case Errc::malformed_info: return "MALFORMED_INFO";
    case Errc::auth_failed: return "AUTH_FAILED";
    case Errc::conflict: return "CONFLICT";
    case Errc::insufficient_credits: return "INSUFFICIENT_CREDITS";
    case Errc::wrong_deadline: return "WRONG_DEADLINE";
    case Errc::token_limit: return "TOKEN_LIMIT";
    case Errc::invalid_signature: return "INVALID_SIGNATURE";
    case Errc::double_spend: return "DOUBLE_SPEND";
    case Errc::expired_info: return "EXPIRED_INFO";
    case Errc::backend_error: return "BACKEND_ERROR";
    case Errc::storage_failure: return "STORAGE_FAILURE";
    case Errc::network: return "NETWORK";
    case Errc::pin_mismatch: return "PIN_MISMATCH";
    case Errc::no_credential: return "NO_CREDENTIAL";
    case Errc::invalid_next_signature: return "INVALID_NEXT_SIGNATURE";
    case Errc::corrupt_wallet: return "CORRUPT_WALLET";
    case Errc::wallet_locked: return "WALLET_LOCKED";
    case Errc::bad_config: return "BAD_CONFIG";
    }
    return "UNKNOWN";
}

} // namespace blindgate
