import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="JNSpace",
    version="0.1.0",
    description="Dyadic John-Nirenberg-Campanato norms, Calderon-Zygmund decompositions and Hardy-kind atoms on grids",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests"]),
    package_data={"JNSpace": ["Configs/*.yml"]},
    install_requires=[
        "numpy>=1.19",
        "scipy>=1.5",
        "pandas>=1.1",
        "PyYAML>=5.4",
        "tqdm>=4.51",
    ],
    extras_require={"test": ["pytest>=6.0"]},
    entry_points={"console_scripts": ["jnspace=JNSpace.JNSpace:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.7",
)
