import java.util.*;

public class Runner {
    // from class notes
    static int compute(int val, int n) {
        if (n == 0) {
            return val;
        }
        return compute(n, val % n);
    }

    public static void main(String[] args) {
        int hold = compute(411, 453);
        System.out.println("result: " + hold);
    }
}
