"""Setup script for audvault."""

from setuptools import setup
from pathlib import Path

# Read README file
this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text(encoding='utf-8') if (this_directory / "README.md").exists() else ""

setup(
    name="audvault",
    version="0.1.0",
    author="audvault developers",
    author_email="noreply@example.com",
    description="Versioned audio dataset publishing, loading and caching with incremental uploads",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="https://github.com/example/audvault",
    packages=["src", "src.audio", "src.backend", "src.cache", "src.cli", "src.core", "src.dependency", "src.load", "src.publish"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: POSIX",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Multimedia :: Sound/Audio",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.21.0",
        "scipy>=1.7.0",
        "pandas>=1.4.0",
        "PyYAML>=6.0",
        "jsonschema>=4.0.0",
        "soundfile>=0.10.0",
        "tqdm>=4.65.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "pytest-mock>=3.8.0",
            "black>=22.0.0",
            "flake8>=5.0.0",
            "mypy>=0.991",
        ],
    },
    entry_points={
        "console_scripts": [
            "audvault=src.cli.main:main",
        ],
    },
    zip_safe=False,
    keywords="audio, dataset, versioning, cache, publishing",
)
