"""
Run manifests: enough to reconstruct the exact command that produced an output directory.
"""
import json
import os
import subprocess
from dataclasses import asdict

from src.config import PROJECT_ROOT, VERSION
from src.utils.data_loader import format_config

MANIFEST_FILE = 'manifest.json'


def version_string():
    """
    A git-describe style version, or ``v<VERSION>`` outside a git checkout.
    """
    try:
        result = subprocess.run(
            ['git', 'describe', '--tags', '--always', '--dirty'],
            cwd=PROJECT_ROOT, capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return f"v{VERSION}"
    described = result.stdout.strip()
    if result.returncode != 0 or not described:
        return f"v{VERSION}"
    return described


def write_manifest(out_dir, argv, config, seed, command):
    """
    Write manifest.json and the effective config into ``out_dir``.

    Args:
        out_dir (str): Output directory (created if missing).
        argv (list): Full command line.
        config (LabConfig): Effective config after overrides.
        seed (int): Effective seed.
        command (str): CLI command name.

    Returns:
        str: Path of the manifest.
    """
    os.makedirs(out_dir, exist_ok=True)
    config_path = os.path.join(out_dir, 'config.conf')
    with open(config_path, 'w', encoding='utf-8') as f:
        f.write(format_config(config))

    manifest = {
        'command': command,
        'argv': list(argv),
        'seed': int(seed),
        'version': version_string(),
        'config_file': os.path.basename(config_path),
        'config': asdict(config),
    }
    path = os.path.join(out_dir, MANIFEST_FILE)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    return path


def read_manifest(out_dir):
    with open(os.path.join(out_dir, MANIFEST_FILE), 'r', encoding='utf-8') as f:
        return json.load(f)
