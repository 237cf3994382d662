"""Exception hierarchy shared across the package."""


class JpegExpireError(Exception):
    """Base class for all errors raised by this package."""


# --- codec ---

class JpegParseError(JpegExpireError):
    """Malformed JFIF byte stream (bad marker, length, or entropy data)."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedModeError(JpegExpireError):
    """Progressive, arithmetic, or otherwise non-baseline JPEG."""


class EncodeRangeError(JpegExpireError):
    """Coefficient magnitude outside what baseline Huffman coding can represent."""


# --- embedding ---

class CapacityError(JpegExpireError):
    """Payload does not fit the usable embedding region."""


class NotProtectedError(JpegExpireError):
    """Input carries no recognizable embedded payload."""


# --- error correction ---

class RSDecodeFailure(JpegExpireError):
    """Reed-Solomon decoder could not produce a consistent codeword."""


# --- crypto envelope ---

class DecryptError(JpegExpireError):
    """Wrong key, corrupted ciphertext, or bad padding."""


class NotEnvelopeError(JpegExpireError):
    """Byte stream does not start with the envelope magic."""


class EnvelopeVersionError(JpegExpireError):
    """Envelope magic recognized but version unsupported."""


class EnvelopeFormatError(JpegExpireError):
    """Envelope fields malformed (truncated, empty URL, bad lengths)."""


# --- keyserver ---

class KeyserverError(JpegExpireError):
    """Base for keyserver-side request failures; carries a wire code."""

    code = "KEYSERVER_ERROR"


class AuthError(KeyserverError):
    code = "AUTH_ERROR"


class NotOwnerError(KeyserverError):
    code = "NOT_OWNER"


class SessionExpiredError(KeyserverError):
    code = "SESSION_EXPIRED"


class InvalidDateError(KeyserverError):
    code = "INVALID_DATE"


class BadRequestError(KeyserverError):
    code = "BAD_REQUEST"


class RecordNotFoundError(KeyserverError):
    code = "NOT_FOUND"


class RecordExpiredError(KeyserverError):
    code = "EXPIRED"


class HashMismatchError(KeyserverError):
    code = "HASH_MISMATCH"


class RateLimitedError(KeyserverError):
    code = "RATE_LIMITED"


class CaptchaRequiredError(KeyserverError):
    """Key exists but a challenge must be solved first."""

    code = "CAPTCHA_REQUIRED"

    def __init__(self, challenge_id: str, prompt: str):
        super().__init__(f"captcha required: {prompt}")
        self.challenge_id = challenge_id
        self.prompt = prompt
