"""Local signing helper bundled with the upstream bootloader tooling."""

import subprocess

CERT_PATH = "TestCert.pem"


def sign_image(image_path):
    """Sign a bootloader image with the bundled test certificate."""
    return subprocess.run(
        ["openssl", "smime", "-sign", "-signer", CERT_PATH, "-in", image_path],
        capture_output=True,
        check=False,
    )
