// expect: race_free
__thread int scratch;
void *worker(void *p) {
  scratch = scratch + 1;
  return NULL;
}
int main() {
  create(worker);
  create(worker);
  scratch = 3;
  return 0;
}
