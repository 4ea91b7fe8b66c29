from setuptools import find_packages, setup

# LOADING DOCUMENTATION
with open("PYPI.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name = 'malab',
    version = '0.1.0',
    packages = find_packages(include = ["malab", "malab.*"]),
    install_requires = [
        "numpy>=1.24",
        "scipy>=1.10",
        "pydantic>=2.5,<3",
        "pytest>=8.4.0",
        "packaging>=21.0",
    ],
    entry_points = {"console_scripts": ["malab = malab.__main__:main"]},
    long_description=long_description,
    long_description_content_type="text/markdown",
    author = 'MALab developers',
    description = 'A numerical lab for the boundary behaviour of degenerate Monge-Ampere equations',
    python_requires = '>=3.10',
)
