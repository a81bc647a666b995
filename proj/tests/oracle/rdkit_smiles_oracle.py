"""Regenerates the frozen SMILES oracle table used by test_smiles.cpp.

Run with RDKit installed:  python3 tests/oracle/rdkit_smiles_oracle.py
Output lines: smiles | atoms | bonds | aromatic atoms | ring atoms | ring bonds | per-atom total H
"""
from rdkit import Chem

MOLECULES = [
    "CO", "CCO", "CC(C)O", "CC(C)(C)O", "CCCCCCCCCCO", "OCCO", "OCC(F)(F)F",
    "OC(C(F)(F)F)C(F)(F)F", "CC#N", "CC#N.CC(=O)O", "O.CC#N", "O.OCC(F)(F)F",
    "C1CCOC1", "CC1CCCO1", "CCOCC", "COC(C)(C)C", "CCOC(C)=O", "CCC(=O)OC",
    "COC(=O)OC", "CCOC(=O)C(C)O", "CCC(C)=O", "CC(=O)N(C)C", "C1CCCCC1",
    "O=C1CCC2OCC1O2",
    # aromatic and charged extras
    "c1ccccc1", "Cc1ccccc1", "COc1ccccc1", "c1ccncc1", "c1ccc2ccccc2c1",
    "Oc1ccccc1O", "C=CCOc1ccccc1O", "C=CCc1cccc(O)c1O", "C=CCc1ccc(O)c(O)c1",
    "c1cc[nH]c1", "c1ccoc1", "c1ccsc1", "CS(C)=O", "CN(C)C=O", "[NH4+]",
    "CC(=O)[O-]", "O=C1CCCCC1", "C%10CC%10",
]

for smi in MOLECULES:
    m = Chem.MolFromSmiles(smi)
    ri = m.GetRingInfo()
    arom = sum(a.GetIsAromatic() for a in m.GetAtoms())
    ring_atoms = sum(ri.NumAtomRings(a.GetIdx()) > 0 for a in m.GetAtoms())
    ring_bonds = sum(ri.NumBondRings(b.GetIdx()) > 0 for b in m.GetBonds())
    hs = ",".join(str(a.GetTotalNumHs()) for a in m.GetAtoms())
    print(f'{{"{smi}", {m.GetNumAtoms()}, {m.GetNumBonds()}, {arom}, {ring_atoms}, {ring_bonds}, "{hs}"}},')
