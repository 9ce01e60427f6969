from robustglm.main import run

run()
