from .verify_wf import build_verify_wf, cmd_verify
