from pathlib import Path

from setuptools import setup, find_packages

this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text()

setup(
    name='scatterkin',
    version='0.1.0',
    packages=find_packages(exclude=["tests", "tests.*", "samples", "samples.*"]),
    license='MIT',
    description='diffusion limit of a hard sphere gas among random fixed scatterers',
    long_description=long_description,
    long_description_content_type='text/markdown',
    python_requires='>=3.10',
    install_requires=["numpy>=1.23.2",
                      "scipy>=1.15",
                      "pandas>=1.4.4",
                      "tqdm>=4.64.1",
                      "orjson>=3.8.10",
                      "toml>=0.10.2"],
)

# python setup.py sdist
# twine upload -r pypi dist/*
